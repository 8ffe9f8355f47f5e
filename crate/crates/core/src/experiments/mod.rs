//! Controlled sweeps over one data characteristic at a time, reduced to
//! correlation tables and group contrasts.
//!
//! Every (seed, variant) pair is an independent task with its own derived
//! stream; results are reduced in variant order, so output does not depend on
//! scheduling.

mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{class_counts, subsample_class, Dataset, RngSeed, MAJORITY, MINORITY};
use crate::error::{invalid, Error, Result};
use crate::eval::{evaluate_grid, EvaluationReport, Metric, DEFAULT_FOLDS};
use crate::learners::LearnerKind;
use crate::profile::{profile_dataset, DataProfile};
use crate::resample::MethodId;
use crate::stats::{
    benjamini_hochberg, cohens_d, compare_spread, pearson, spearman, welch_t, CorrelationResult, EffectSize,
    SpreadComparison, WelchTest,
};
use crate::synth::{generate, GenSpec, DEFAULT_DIM, DEFAULT_N_TOTAL, FACTORIAL_IR};

pub use report::{manifest, rows_csv, write_outputs, Manifest};

pub const DEFAULT_SEEDS: [u64; 3] = [17, 29, 43];
pub const FDR_Q: f64 = 0.05;
/// Rows above this imbalance ratio are dropped by [`sensitivity_extreme_ir`].
pub const EXTREME_IR: f64 = 100.0;
/// Imbalance ratios that get a second replicate in the IR sweep.
pub const REPLICATED_IR: [f64; 4] = [20.0, 30.0, 50.0, 80.0];
pub const C1_SEP: [f64; 6] = [0.3, 0.5, 0.8, 1.0, 1.2, 1.5];
pub const C2_CLUSTERS: [usize; 4] = [1, 2, 3, 5];
pub const C3_N_TOTAL: [usize; 6] = [200, 500, 800, 1100, 1500, 2000];
/// Relative tolerance on realized separability for the held-constant check.
pub const SEP_BAND: f64 = 0.05;
/// Natural imbalance of the synthetic stand-in used when the within-dataset
/// sweep has no real dataset.
pub const STAND_IN_IR: f64 = 2.0;
const SMALL_N_MIN: f64 = 50.0;
const LARGE_N_MIN: f64 = 100.0;
const VAL_A_METRICS: [Metric; 4] = [Metric::AucRoc, Metric::AucPr, Metric::F1, Metric::Gmean];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentId {
    Stage1,
    B1,
    #[default]
    B2,
    C1,
    C2,
    C3,
    ValA,
    ValB,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Stage1,
        ExperimentId::B1,
        ExperimentId::B2,
        ExperimentId::C1,
        ExperimentId::C2,
        ExperimentId::C3,
        ExperimentId::ValA,
        ExperimentId::ValB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Stage1 => "STAGE1",
            ExperimentId::B1 => "B1",
            ExperimentId::B2 => "B2",
            ExperimentId::C1 => "C1",
            ExperimentId::C2 => "C2",
            ExperimentId::C3 => "C3",
            ExperimentId::ValA => "VAL_A",
            ExperimentId::ValB => "VAL_B",
        }
    }

    /// What the experiment varies and what it holds fixed.
    pub fn design(self) -> Design {
        let (manipulated, held): (&str, &[&str]) = match self {
            ExperimentId::Stage1 => ("dataset (observational)", &[]),
            ExperimentId::B1 => ("ir (by subsampling one class)", &["feature distribution of the source dataset"]),
            ExperimentId::B2 | ExperimentId::ValA | ExperimentId::ValB => {
                ("ir", &["separability=1.0", "clusters=3", "n_total", "dim"])
            }
            ExperimentId::C1 => ("separability", &["ir=10", "clusters=3", "n_total", "dim"]),
            ExperimentId::C2 => ("clusters", &["ir=10", "separability=1.0", "n_total", "dim"]),
            ExperimentId::C3 => ("n_total", &["ir=10", "separability=1.0", "clusters=3", "dim"]),
        };
        Design { manipulated: manipulated.into(), held_constant: held.iter().map(|s| s.to_string()).collect() }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().replace('-', "_");
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(&wanted) || e.name().replace('_', "").eq_ignore_ascii_case(&wanted))
            .ok_or_else(|| invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub manipulated: String,
    pub held_constant: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Root seeds; every variant is generated and evaluated once per seed.
    pub seeds: Vec<u64>,
    /// Methods compared against the baseline. Methods a headline needs are
    /// added if missing.
    pub methods: Vec<MethodId>,
    pub learners: Vec<LearnerKind>,
    pub folds: usize,
    /// Effectiveness metric for headline correlations.
    pub metric: Metric,
    pub n_total: usize,
    pub dim: usize,
    /// CSV inputs for the cross-dataset and within-dataset experiments.
    pub datasets: Vec<PathBuf>,
    /// Target imbalance ratios for the within-dataset sweep.
    pub ir_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentId::default(),
            seeds: DEFAULT_SEEDS.to_vec(),
            methods: MethodId::ALL.into_iter().filter(|&m| m != MethodId::Baseline).collect(),
            learners: vec![LearnerKind::Logistic, LearnerKind::Tree],
            folds: DEFAULT_FOLDS,
            metric: Metric::AucRoc,
            n_total: DEFAULT_N_TOTAL,
            dim: DEFAULT_DIM,
            datasets: Vec::new(),
            ir_grid: FACTORIAL_IR.to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        Self { experiment, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        if self.learners.is_empty() {
            return Err(invalid("at least one learner is required"));
        }
        if self.folds < 2 {
            return Err(invalid(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }

    fn methods_with(&self, required: &[MethodId]) -> Vec<MethodId> {
        let mut m: Vec<MethodId> = self.methods.iter().chain(required).copied().collect();
        m.retain(|&x| x != MethodId::Baseline);
        m.sort();
        m.dedup();
        m
    }
}

/// One dataset condition of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantDef {
    pub label: String,
    pub ir_target: Option<f64>,
    pub sep_target: Option<f64>,
    pub clusters: Option<usize>,
    pub n_total: Option<usize>,
}

impl VariantDef {
    fn synthetic(label: String, ir: f64, sep: f64, clusters: usize, n_total: usize) -> Self {
        Self { label, ir_target: Some(ir), sep_target: Some(sep), clusters: Some(clusters), n_total: Some(n_total) }
    }

    fn gen_spec(&self, seed: u64, dim: usize) -> GenSpec {
        GenSpec {
            ir: self.ir_target.unwrap_or(1.0),
            sep_target: self.sep_target.unwrap_or(1.0),
            clusters: self.clusters.unwrap_or(1),
            n_total: self.n_total.unwrap_or(DEFAULT_N_TOTAL),
            dim,
            seed: variant_seed(seed, &self.label),
        }
    }
}

/// Stream of one (root seed, variant) task.
pub fn variant_seed(seed: u64, label: &str) -> RngSeed {
    RngSeed::new(seed).derive(label)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanImprovement {
    pub method: MethodId,
    pub metric: Metric,
    /// Mean over seeds and learners.
    pub absolute: f64,
    /// Mean over the defined relative records; `None` if there were none.
    pub relative: Option<f64>,
    pub n: usize,
    pub n_relative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRow {
    #[serde(flatten)]
    pub def: VariantDef,
    /// Profile values averaged over the evaluated seeds.
    pub ir: f64,
    pub separability: f64,
    pub n_minority: f64,
    pub cluster_estimate: f64,
    pub seeds_evaluated: usize,
    /// Borderline-SMOTE improvement minus SMOTE improvement on the headline
    /// metric (cross-dataset experiment only).
    pub advantage: Option<f64>,
    pub improvements: Vec<MeanImprovement>,
}

impl VariantRow {
    /// Named column used by headline correlations: a profile field,
    /// `advantage`, or `delta_abs.<METHOD>.<METRIC>` /
    /// `delta_rel.<METHOD>.<METRIC>`.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "ir" => Some(self.ir),
            "separability" => Some(self.separability),
            "n_minority" => Some(self.n_minority),
            "cluster_estimate" => Some(self.cluster_estimate),
            "clusters" => self.def.clusters.map(|k| k as f64),
            "n_total" => self.def.n_total.map(|n| n as f64),
            "advantage" => self.advantage,
            _ => {
                let mut parts = name.split('.');
                let kind = parts.next()?;
                let method: MethodId = parts.next()?.parse().ok()?;
                let metric: Metric = parts.next()?.parse().ok()?;
                let imp = self.improvement(method, metric)?;
                match kind {
                    "delta_abs" => Some(imp.absolute),
                    "delta_rel" => imp.relative,
                    _ => None,
                }
            }
        }
    }

    pub fn improvement(&self, method: MethodId, metric: Metric) -> Option<&MeanImprovement> {
        self.improvements.iter().find(|i| i.method == method && i.metric == metric)
    }
}

pub fn delta_abs(method: MethodId, metric: Metric) -> String {
    format!("delta_abs.{method}.{metric}")
}

pub fn delta_rel(method: MethodId, metric: Metric) -> String {
    format!("delta_rel.{method}.{metric}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineCorrelation {
    pub kind: CorrelationKind,
    /// Variant-row columns the correlation was computed from.
    pub x: String,
    pub y: String,
    pub result: Option<CorrelationResult>,
    /// Why `result` is missing.
    pub note: Option<String>,
    /// Benjamini–Hochberg decision across this experiment's headlines.
    pub fdr_reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub group_a: String,
    pub group_b: String,
    pub effect: Option<EffectSize>,
    pub welch: Option<WelchTest>,
    pub spread: Option<SpreadComparison>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Per-seed, per-learner outcome; one CSV row per method.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub seed: u64,
    pub def: VariantDef,
    pub profile: DataProfile,
    pub method: MethodId,
    pub learner: LearnerKind,
    pub base: BTreeMap<Metric, f64>,
    pub score: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: ExperimentId,
    pub design: Design,
    pub metric: Metric,
    pub variants: Vec<VariantRow>,
    pub headline: Vec<HeadlineCorrelation>,
    pub groups: Vec<GroupSummary>,
    pub contrasts: Vec<Contrast>,
    pub summary: BTreeMap<String, f64>,
    pub controls: Vec<ControlCheck>,
    /// Skipped variants and other degenerate conditions.
    pub flags: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<RunRow>,
}

struct Cell {
    seed: u64,
    variant: usize,
    profile: DataProfile,
    report: EvaluationReport,
}

impl Cell {
    /// Improvement of `method` averaged over learners.
    fn delta(&self, method: MethodId, metric: Metric) -> Option<f64> {
        let v: Vec<f64> = self
            .report
            .improvements
            .iter()
            .filter(|r| r.method == method && r.metric == metric)
            .map(|r| r.absolute)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

struct Sweep {
    defs: Vec<VariantDef>,
    cells: Vec<Cell>,
    flags: Vec<String>,
}

/// Runs every (seed, variant) task. `make` builds the dataset of one task;
/// failures become flags.
fn sweep(
    cfg: &ExperimentConfig,
    defs: Vec<VariantDef>,
    methods: &[MethodId],
    make: &(dyn Fn(u64, &VariantDef) -> Result<Dataset> + Sync),
) -> Sweep {
    let tasks: Vec<(u64, usize)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| (0..defs.len()).map(move |v| (s, v)))
        .collect();
    let outcomes: Vec<Result<Cell>> = tasks
        .par_iter()
        .map(|&(seed, variant)| {
            let def = &defs[variant];
            let data = make(seed, def)?;
            let stream = variant_seed(seed, &def.label);
            let profile = profile_dataset(&data, stream.derive("profile"))?;
            let report = evaluate_grid(&data, methods, &cfg.learners, cfg.folds, stream.derive("eval"))?;
            Ok(Cell { seed, variant, profile, report })
        })
        .collect();
    let mut cells = Vec::new();
    let mut flags = Vec::new();
    for ((seed, variant), outcome) in tasks.into_iter().zip(outcomes) {
        match outcome {
            Ok(c) => cells.push(c),
            Err(e) => flags.push(format!("{} seed {seed}: skipped, {e}", defs[variant].label)),
        }
    }
    Sweep { defs, cells, flags }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> Option<f64> {
    (v.len() > 1).then(|| {
        let m = mean(v);
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    })
}

impl Sweep {
    fn variant_rows(&self, methods: &[MethodId]) -> Vec<VariantRow> {
        let mut out = Vec::new();
        for (v, def) in self.defs.iter().enumerate() {
            let cells: Vec<&Cell> = self.cells.iter().filter(|c| c.variant == v).collect();
            if cells.is_empty() {
                continue;
            }
            let avg = |f: &dyn Fn(&DataProfile) -> f64| mean(&cells.iter().map(|c| f(&c.profile)).collect::<Vec<_>>());
            let mut improvements = Vec::new();
            for &method in methods {
                for metric in Metric::ALL {
                    let records: Vec<_> = cells
                        .iter()
                        .flat_map(|c| c.report.improvements.iter())
                        .filter(|r| r.method == method && r.metric == metric)
                        .collect();
                    if records.is_empty() {
                        continue;
                    }
                    let abs: Vec<f64> = records.iter().map(|r| r.absolute).collect();
                    let rel: Vec<f64> = records.iter().filter_map(|r| r.relative).collect();
                    improvements.push(MeanImprovement {
                        method,
                        metric,
                        absolute: mean(&abs),
                        relative: (!rel.is_empty()).then(|| mean(&rel)),
                        n: abs.len(),
                        n_relative: rel.len(),
                    });
                }
            }
            out.push(VariantRow {
                def: def.clone(),
                ir: avg(&|p| p.ir),
                separability: avg(&|p| p.separability),
                n_minority: avg(&|p| p.n_minority as f64),
                cluster_estimate: avg(&|p| p.cluster_estimate as f64),
                seeds_evaluated: cells.len(),
                advantage: None,
                improvements,
            });
        }
        out
    }

    fn run_rows(&self) -> Vec<RunRow> {
        let mut rows = Vec::new();
        for c in &self.cells {
            for r in c.report.reports.iter().filter(|r| r.method != MethodId::Baseline) {
                let base = c
                    .report
                    .reports
                    .iter()
                    .find(|b| b.method == MethodId::Baseline && b.learner == r.learner)
                    .expect("baseline evaluated for every learner");
                rows.push(RunRow {
                    seed: c.seed,
                    def: self.defs[c.variant].clone(),
                    profile: c.profile.clone(),
                    method: r.method,
                    learner: r.learner,
                    base: base.mean.clone(),
                    score: r.mean.clone(),
                });
            }
        }
        rows.sort_by(|a, b| {
            (a.seed, a.method, a.learner)
                .cmp(&(b.seed, b.method, b.learner))
                .then_with(|| self.position(&a.def).cmp(&self.position(&b.def)))
        });
        rows
    }

    fn position(&self, def: &VariantDef) -> usize {
        self.defs.iter().position(|d| d.label == def.label).unwrap_or(usize::MAX)
    }

    /// Per-(variant, seed) improvements averaged over learners, for the
    /// cells `pick` accepts.
    fn observations(&self, method: MethodId, metric: Metric, pick: &dyn Fn(&Cell) -> bool) -> Vec<f64> {
        self.cells.iter().filter(|c| pick(c)).filter_map(|c| c.delta(method, metric)).collect()
    }

    /// Realized IR and separability of synthetic cells against their targets.
    fn controls(&self) -> Vec<ControlCheck> {
        let mut ir_bad = Vec::new();
        let mut sep_worst: f64 = 0.0;
        for c in &self.cells {
            let def = &self.defs[c.variant];
            if let Some(t) = def.ir_target {
                if c.profile.ir != t {
                    ir_bad.push(format!("{} seed {}: {}", def.label, c.seed, c.profile.ir));
                }
            }
            if let Some(t) = def.sep_target {
                sep_worst = sep_worst.max((c.profile.separability - t).abs() / t);
            }
        }
        vec![
            ControlCheck {
                name: "ir_exact".into(),
                passed: ir_bad.is_empty(),
                detail: if ir_bad.is_empty() { "realized IR equals target in every cell".into() } else { ir_bad.join("; ") },
            },
            ControlCheck {
                name: "separability_band".into(),
                passed: sep_worst <= SEP_BAND,
                detail: format!("largest relative deviation {sep_worst:.4} (band {SEP_BAND})"),
            },
        ]
    }
}

fn correlate(rows: &[VariantRow], kind: CorrelationKind, x: &str, y: &str) -> HeadlineCorrelation {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| Some((r.column(x)?, r.column(y)?)))
        .unzip();
    let computed = match kind {
        CorrelationKind::Pearson => pearson(&xs, &ys),
        CorrelationKind::Spearman => spearman(&xs, &ys),
    };
    let (result, note) = match computed {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    HeadlineCorrelation { kind, x: x.into(), y: y.into(), result, note, fdr_reject: false }
}

fn apply_fdr(headline: &mut [HeadlineCorrelation]) {
    let defined: Vec<usize> = (0..headline.len()).filter(|&i| headline[i].result.is_some()).collect();
    let p: Vec<f64> = defined.iter().map(|&i| headline[i].result.as_ref().unwrap().p_two_tailed).collect();
    for (&i, reject) in defined.iter().zip(benjamini_hochberg(&p, FDR_Q)) {
        headline[i].fdr_reject = reject;
    }
}

fn group(label: &str, obs: &[f64]) -> Option<GroupSummary> {
    (!obs.is_empty()).then(|| GroupSummary { label: label.into(), n: obs.len(), mean: mean(obs), sd: sd(obs) })
}

/// Assembles the result; callers fill in groups, contrasts and summary.
fn finish(
    cfg: &ExperimentConfig,
    sweep: &Sweep,
    variants: Vec<VariantRow>,
    mut headline: Vec<HeadlineCorrelation>,
    controls: Vec<ControlCheck>,
) -> ExperimentResult {
    apply_fdr(&mut headline);
    ExperimentResult {
        experiment: cfg.experiment,
        design: cfg.experiment.design(),
        metric: cfg.metric,
        variants,
        headline,
        groups: Vec::new(),
        contrasts: Vec::new(),
        summary: BTreeMap::new(),
        controls,
        flags: sweep.flags.clone(),
        rows: sweep.run_rows(),
    }
}

fn synthetic_sweep(cfg: &ExperimentConfig, defs: Vec<VariantDef>, methods: &[MethodId]) -> Sweep {
    let dim = cfg.dim;
    sweep(cfg, defs, methods, &|seed, def| {
        let spec = def.gen_spec(seed, dim);
        spec.validate()?;
        Ok(generate(&spec)?.dataset)
    })
}

/// IR sweep at separability 1.0 and three clusters: the eight grid levels
/// plus a second replicate at the four largest.
pub fn ir_sweep_variants(n_total: usize) -> Vec<VariantDef> {
    let mut defs: Vec<VariantDef> = FACTORIAL_IR
        .iter()
        .map(|&ir| VariantDef::synthetic(format!("ir={ir}/rep=0"), ir, 1.0, 3, n_total))
        .collect();
    defs.extend(
        REPLICATED_IR
            .iter()
            .map(|&ir| VariantDef::synthetic(format!("ir={ir}/rep=1"), ir, 1.0, 3, n_total)),
    );
    defs
}

pub fn run(cfg: &ExperimentConfig, real: &[(String, Dataset)]) -> Result<ExperimentResult> {
    match cfg.experiment {
        ExperimentId::Stage1 => run_stage1(real, cfg),
        ExperimentId::B1 => {
            let data = match real.first() {
                Some((_, d)) => d.clone(),
                None => stand_in_dataset(cfg)?,
            };
            run_b1(&data, &cfg.ir_grid, cfg)
        }
        ExperimentId::B2 => run_b2(cfg),
        ExperimentId::C1 => run_c1(cfg),
        ExperimentId::C2 => run_c2(cfg),
        ExperimentId::C3 => run_c3(cfg),
        ExperimentId::ValA => run_val_a(cfg),
        ExperimentId::ValB => run_val_b(cfg),
    }
}

/// Synthetic dataset (separability 1.0, three clusters, IR 2) standing in
/// for a real one in the within-dataset sweep.
pub fn stand_in_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let seed = *cfg.seeds.first().ok_or_else(|| invalid("at least one seed is required"))?;
    let spec = GenSpec {
        n_total: cfg.n_total,
        dim: cfg.dim,
        ..GenSpec::new(STAND_IN_IR, 1.0, 3, variant_seed(seed, "stand-in"))
    };
    Ok(generate(&spec)?.dataset)
}

/// Cross-dataset analysis: Borderline-SMOTE's advantage over SMOTE against
/// each dataset's imbalance ratio.
pub fn run_stage1(datasets: &[(String, Dataset)], cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    if datasets.len() < 5 {
        return Err(invalid(format!("cross-dataset analysis needs at least 5 datasets, got {}", datasets.len())));
    }
    let defs: Vec<VariantDef> = datasets
        .iter()
        .map(|(name, _)| VariantDef { label: name.clone(), ir_target: None, sep_target: None, clusters: None, n_total: None })
        .collect();
    let methods = cfg.methods_with(&[MethodId::Smote, MethodId::BorderlineSmote]);
    let s = sweep(cfg, defs, &methods, &|_, def| {
        Ok(datasets.iter().find(|(n, _)| *n == def.label).expect("label from dataset list").1.clone())
    });
    let mut variants = s.variant_rows(&methods);
    for v in &mut variants {
        let b = v.improvement(MethodId::BorderlineSmote, cfg.metric).map(|i| i.absolute);
        let sm = v.improvement(MethodId::Smote, cfg.metric).map(|i| i.absolute);
        v.advantage = b.zip(sm).map(|(b, s)| b - s);
    }
    let headline = vec![
        correlate(&variants, CorrelationKind::Pearson, "ir", "advantage"),
        correlate(&variants, CorrelationKind::Pearson, "ir", "separability"),
    ];
    Ok(finish(cfg, &s, variants, headline, vec![]))
}

/// Within-dataset IR sweep: raises IR by shrinking the minority, lowers it
/// by shrinking the majority.
pub fn run_b1(data: &Dataset, ir_grid: &[f64], cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let counts = class_counts(data);
    let natural = crate::data::imbalance_ratio(counts)?;
    let mut flags = Vec::new();
    let mut defs = Vec::new();
    let mut plans = Vec::new();
    for &t in ir_grid {
        let (keep_maj, keep_min) = if t == natural {
            (counts.n_majority, counts.n_minority)
        } else if t > natural {
            (counts.n_majority, (counts.n_majority as f64 / t).round() as usize)
        } else {
            ((t * counts.n_minority as f64).round() as usize, counts.n_minority)
        };
        if t.is_nan() || t < 1.0 || keep_min < 2 * cfg.folds || keep_maj < 2 * cfg.folds {
            flags.push(format!("ir={t}: unachievable by subsampling ({keep_maj} majority, {keep_min} minority)"));
            continue;
        }
        defs.push(VariantDef { label: format!("ir={t}"), ir_target: Some(t), sep_target: None, clusters: None, n_total: None });
        plans.push((keep_maj, keep_min));
    }
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let labels: Vec<String> = defs.iter().map(|d| d.label.clone()).collect();
    let mut s = sweep(cfg, defs, &methods, &|seed, def| {
        let (keep_maj, keep_min) = plans[labels.iter().position(|l| *l == def.label).expect("planned label")];
        let stream = variant_seed(seed, &def.label).derive("subsample");
        let d = if keep_min < counts.n_minority {
            subsample_class(data, MINORITY, keep_min, stream)?
        } else if keep_maj < counts.n_majority {
            subsample_class(data, MAJORITY, keep_maj, stream)?
        } else {
            data.clone()
        };
        Ok(d)
    });
    flags.append(&mut s.flags);
    s.flags = flags;
    let variants = s.variant_rows(&methods);
    let headline = vec![correlate(&variants, CorrelationKind::Pearson, "ir", &delta_abs(MethodId::Smote, cfg.metric))];
    Ok(finish(cfg, &s, variants, headline, vec![]))
}

/// IR sweep on synthetic data with separability and cluster count fixed.
pub fn run_b2(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let s = synthetic_sweep(cfg, ir_sweep_variants(cfg.n_total), &methods);
    let variants = s.variant_rows(&methods);
    let headline = vec![correlate(&variants, CorrelationKind::Pearson, "ir", &delta_abs(MethodId::Smote, cfg.metric))];
    let controls = s.controls();
    Ok(finish(cfg, &s, variants, headline, controls))
}

/// Separability sweep at IR 10 with three clusters.
pub fn run_c1(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let defs = C1_SEP
        .iter()
        .map(|&sep| VariantDef::synthetic(format!("sep={sep}"), 10.0, sep, 3, cfg.n_total))
        .collect();
    let s = synthetic_sweep(cfg, defs, &methods);
    let variants = s.variant_rows(&methods);
    let y = delta_abs(MethodId::Smote, cfg.metric);
    let headline = vec![
        correlate(&variants, CorrelationKind::Pearson, "separability", &y),
        correlate(&variants, CorrelationKind::Spearman, "separability", &y),
    ];
    let groups = s
        .defs
        .iter()
        .enumerate()
        .filter_map(|(v, d)| group(&d.label, &s.observations(MethodId::Smote, cfg.metric, &|c| c.variant == v)))
        .collect();
    let controls = s.controls();
    Ok(ExperimentResult { groups, ..finish(cfg, &s, variants, headline, controls) })
}

/// Cluster-count sweep at IR 10 and separability 1.0; contrasts three or
/// more clusters with a single cluster.
pub fn run_c2(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let defs = C2_CLUSTERS
        .iter()
        .map(|&k| VariantDef::synthetic(format!("k={k}"), 10.0, 1.0, k, cfg.n_total))
        .collect();
    let s = synthetic_sweep(cfg, defs, &methods);
    let variants = s.variant_rows(&methods);
    let k_of = |c: &Cell| s.defs[c.variant].clusters.unwrap_or(1);
    let mut groups: Vec<GroupSummary> = s
        .defs
        .iter()
        .enumerate()
        .filter_map(|(v, d)| group(&d.label, &s.observations(MethodId::Smote, cfg.metric, &|c| c.variant == v)))
        .collect();
    let many = s.observations(MethodId::Smote, cfg.metric, &|c| k_of(c) >= 3);
    let one = s.observations(MethodId::Smote, cfg.metric, &|c| k_of(c) == 1);
    groups.extend(group("k>=3", &many));
    groups.extend(group("k=1", &one));
    let effect = cohens_d(&many, &one);
    let welch = welch_t(&many, &one);
    let note = effect.as_ref().err().or(welch.as_ref().err()).map(|e| e.to_string());
    let contrasts = vec![Contrast {
        group_a: "k>=3".into(),
        group_b: "k=1".into(),
        effect: effect.ok(),
        welch: welch.ok(),
        spread: None,
        note,
    }];
    let controls = s.controls();
    Ok(ExperimentResult { groups, contrasts, ..finish(cfg, &s, variants, vec![], controls) })
}

/// Sample-size sweep at IR 10, separability 1.0 and three clusters.
pub fn run_c3(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let defs = C3_N_TOTAL
        .iter()
        .map(|&n| VariantDef::synthetic(format!("n={n}"), 10.0, 1.0, 3, n))
        .collect();
    let s = synthetic_sweep(cfg, defs, &methods);
    let variants = s.variant_rows(&methods);
    let headline = vec![correlate(&variants, CorrelationKind::Pearson, "n_minority", &delta_abs(MethodId::Smote, cfg.metric))];
    let small = s.observations(MethodId::Smote, cfg.metric, &|c| (c.profile.n_minority as f64) < SMALL_N_MIN);
    let large = s.observations(MethodId::Smote, cfg.metric, &|c| (c.profile.n_minority as f64) >= LARGE_N_MIN);
    let groups = [group("n_min<50", &small), group("n_min>=100", &large)].into_iter().flatten().collect();
    let spread = compare_spread(&small, &large);
    let contrasts = vec![Contrast {
        group_a: "n_min<50".into(),
        group_b: "n_min>=100".into(),
        effect: None,
        welch: None,
        note: spread.as_ref().err().map(|e| e.to_string()),
        spread: spread.ok(),
    }];
    let controls = s.controls();
    Ok(ExperimentResult { groups, contrasts, ..finish(cfg, &s, variants, headline, controls) })
}

/// Absolute and headroom-normalized improvement against IR for four
/// metrics, to separate a real IR effect from a ceiling effect.
pub fn run_val_a(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let s = synthetic_sweep(cfg, ir_sweep_variants(cfg.n_total), &methods);
    let variants = s.variant_rows(&methods);
    let mut headline = Vec::new();
    for m in VAL_A_METRICS {
        headline.push(correlate(&variants, CorrelationKind::Pearson, "ir", &delta_abs(MethodId::Smote, m)));
        headline.push(correlate(&variants, CorrelationKind::Pearson, "ir", &delta_rel(MethodId::Smote, m)));
    }
    let controls = s.controls();
    Ok(finish(cfg, &s, variants, headline, controls))
}

/// Relative improvement against IR for all eight metrics, FDR-corrected,
/// with the mean correlation.
pub fn run_val_b(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let methods = cfg.methods_with(&[MethodId::Smote]);
    let s = synthetic_sweep(cfg, ir_sweep_variants(cfg.n_total), &methods);
    let variants = s.variant_rows(&methods);
    let headline: Vec<HeadlineCorrelation> = Metric::ALL
        .into_iter()
        .map(|m| correlate(&variants, CorrelationKind::Pearson, "ir", &delta_rel(MethodId::Smote, m)))
        .collect();
    let rs: Vec<f64> = headline.iter().filter_map(|h| h.result.as_ref().map(|r| r.r)).collect();
    let mut summary = BTreeMap::new();
    if !rs.is_empty() {
        summary.insert("mean_r".to_string(), mean(&rs));
    }
    summary.insert("metrics_correlated".to_string(), rs.len() as f64);
    let controls = s.controls();
    Ok(ExperimentResult { summary, ..finish(cfg, &s, variants, headline, controls) })
}

/// Recomputes the first IR headline without rows whose IR exceeds
/// [`EXTREME_IR`].
pub fn sensitivity_extreme_ir(result: &ExperimentResult) -> Result<CorrelationResult> {
    let h = result
        .headline
        .iter()
        .find(|h| h.x == "ir")
        .ok_or_else(|| invalid(format!("{} has no IR headline", result.experiment)))?;
    let kept: Vec<VariantRow> = result.variants.iter().filter(|v| v.ir <= EXTREME_IR).cloned().collect();
    let c = correlate(&kept, h.kind, &h.x, &h.y);
    c.result.ok_or_else(|| Error::UndefinedCorrelation(c.note.unwrap_or_default()))
}
