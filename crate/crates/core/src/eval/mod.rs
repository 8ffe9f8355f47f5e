//! Stratified cross-validation with resampling confined to training folds.

pub mod metrics;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RngSeed, MAJORITY, MINORITY};
use crate::error::{invalid, Result};
use crate::learners::{score, train, LearnerKind, LearnerSpec};
use crate::resample::{apply_method, MethodId};

pub use metrics::{all_metrics, auc_pr, auc_roc, confusion_metrics, relative_improvement, Metric};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }
}

/// Shuffles each class with `rng`, then deals its rows round-robin to the
/// `k` folds.
pub fn stratified_folds(data: &Dataset, k: usize, rng: RngSeed) -> Result<FoldPlan> {
    if k < 2 {
        return Err(invalid(format!("need at least 2 folds, got {k}")));
    }
    let mut r = rng.rng();
    let mut assignments = vec![0; data.len()];
    for label in [MAJORITY, MINORITY] {
        let mut rows = data.indices_of(label);
        if rows.len() < k {
            return Err(invalid(format!("class {label} has {} rows, fewer than {k} folds", rows.len())));
        }
        rows.shuffle(&mut r);
        for (pos, i) in rows.into_iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    Ok(FoldPlan { k, assignments })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub metrics: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: MethodId,
    pub learner: LearnerKind,
    pub mean: BTreeMap<Metric, f64>,
    /// Sample standard deviation over evaluated folds (0 with one fold).
    pub sd: BTreeMap<Metric, f64>,
    pub effective_folds: usize,
    /// Folds whose test rows held a single class.
    pub skipped_folds: Vec<usize>,
    pub folds: Vec<FoldScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRecord {
    pub method: MethodId,
    pub learner: LearnerKind,
    pub metric: Metric,
    pub absolute: f64,
    pub relative: Option<f64>,
}

/// [`evaluate_pipeline`] with a probe that sees, for every evaluated fold,
/// the row indices handed to the resampler.
pub fn evaluate_pipeline_observed(
    data: &Dataset,
    method: MethodId,
    learner: &LearnerSpec,
    folds: &FoldPlan,
    rng: RngSeed,
    observe: &mut dyn FnMut(usize, &[usize]),
) -> Result<MetricReport> {
    if folds.assignments.len() != data.len() {
        return Err(invalid("fold plan does not cover the dataset"));
    }
    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for fold in 0..folds.k {
        let test = folds.test_rows(fold);
        let test_labels: Vec<u8> = test.iter().map(|&i| data.labels()[i]).collect();
        if !test_labels.contains(&MINORITY) || !test_labels.contains(&MAJORITY) {
            skipped.push(fold);
            continue;
        }
        let train_rows = folds.train_rows(fold);
        observe(fold, &train_rows);
        let fold_rng = rng.derive(&format!("fold{fold}"));
        let resampled = apply_method(method, &data.select(&train_rows), fold_rng.derive("resample"))?;
        let spec = LearnerSpec::new(learner.kind, learner.seed.derive(&format!("fold{fold}")));
        let model = train(&spec, &resampled)?;
        let test_x = data.select(&test);
        let scores = score(&model, test_x.features(), data.dim())?;
        scored.push(FoldScore { fold, metrics: all_metrics(&scores, &test_labels)? });
    }
    let (mean, sd) = summarize(&scored);
    Ok(MetricReport {
        method,
        learner: learner.kind,
        mean,
        sd,
        effective_folds: scored.len(),
        skipped_folds: skipped,
        folds: scored,
    })
}

/// For each fold: resample only the rows outside it, train, score the fold.
/// Metrics are averaged over folds; single-class test folds are skipped and
/// listed in the report.
pub fn evaluate_pipeline(
    data: &Dataset,
    method: MethodId,
    learner: &LearnerSpec,
    folds: &FoldPlan,
    rng: RngSeed,
) -> Result<MetricReport> {
    evaluate_pipeline_observed(data, method, learner, folds, rng, &mut |_, _| {})
}

fn summarize(scored: &[FoldScore]) -> (BTreeMap<Metric, f64>, BTreeMap<Metric, f64>) {
    let mut mean = BTreeMap::new();
    let mut sd = BTreeMap::new();
    if scored.is_empty() {
        return (mean, sd);
    }
    let n = scored.len() as f64;
    for m in Metric::ALL {
        let values: Vec<f64> = scored.iter().map(|f| f.metrics[&m]).collect();
        let mu = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean.insert(m, mu);
        sd.insert(m, var.sqrt());
    }
    (mean, sd)
}

/// Method-minus-baseline records for every metric, same learner and folds.
pub fn improvements(base: &MetricReport, over: &MetricReport) -> Vec<ImprovementRecord> {
    Metric::ALL
        .into_iter()
        .filter_map(|m| {
            let (b, o) = (*base.mean.get(&m)?, *over.mean.get(&m)?);
            Some(ImprovementRecord {
                method: over.method,
                learner: over.learner,
                metric: m,
                absolute: o - b,
                relative: relative_improvement(b, o),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub reports: Vec<MetricReport>,
    pub improvements: Vec<ImprovementRecord>,
}

/// Evaluates every (method, learner) pair on one shared fold plan. The
/// baseline is always included so improvements can be formed.
pub fn evaluate_grid(
    data: &Dataset,
    methods: &[MethodId],
    learners: &[LearnerKind],
    k: usize,
    seed: RngSeed,
) -> Result<EvaluationReport> {
    let folds = stratified_folds(data, k, seed.derive("folds"))?;
    let mut methods: Vec<MethodId> = methods.to_vec();
    methods.push(MethodId::Baseline);
    methods.sort();
    methods.dedup();
    let mut learners = learners.to_vec();
    learners.sort();
    learners.dedup();
    let tasks: Vec<(MethodId, LearnerKind)> = methods
        .iter()
        .flat_map(|&m| learners.iter().map(move |&l| (m, l)))
        .collect();
    let cv = seed.derive("cv");
    let learner_seed = seed.derive("learner");
    let reports = tasks
        .par_iter()
        .map(|&(m, l)| evaluate_pipeline(data, m, &LearnerSpec::new(l, learner_seed), &folds, cv))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for r in reports.iter().filter(|r| r.method != MethodId::Baseline) {
        let base = reports
            .iter()
            .find(|b| b.method == MethodId::Baseline && b.learner == r.learner)
            .expect("baseline evaluated for every learner");
        records.extend(improvements(base, r));
    }
    Ok(EvaluationReport { reports, improvements: records })
}
