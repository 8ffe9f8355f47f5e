//! Ranking and confusion-matrix metrics. Label `1` is the positive class.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Decision threshold for the confusion-matrix metrics.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    AucRoc,
    AucPr,
    F1,
    Gmean,
    Recall,
    Specificity,
    Precision,
    BalAcc,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::AucRoc,
        Metric::AucPr,
        Metric::F1,
        Metric::Gmean,
        Metric::Recall,
        Metric::Specificity,
        Metric::Precision,
        Metric::BalAcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AucRoc => "AUC_ROC",
            Metric::AucPr => "AUC_PR",
            Metric::F1 => "F1",
            Metric::Gmean => "GMEAN",
            Metric::Recall => "RECALL",
            Metric::Specificity => "SPECIFICITY",
            Metric::Precision => "PRECISION",
            Metric::BalAcc => "BAL_ACC",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(format!("unknown metric `{s}`")))
    }
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(invalid(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    Ok((pos, labels.len() - pos))
}

/// Mann–Whitney AUC with average ranks for tied scores.
pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check_lengths(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric("AUC-ROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Average precision: one step per distinct score, highest first.
pub fn auc_pr(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, _) = check_lengths(scores, labels)?;
    if pos == 0 {
        return Err(Error::UndefinedMetric("average precision needs a positive label".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    Ok(ap)
}

/// Threshold metrics; a row is predicted positive when its score is at
/// least `threshold`.
pub fn confusion_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> Result<BTreeMap<Metric, f64>> {
    let (pos, neg) = check_lengths(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric("confusion metrics need both classes".into()));
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        if s >= threshold {
            if l == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let tn = neg - fp;
    let recall = tp as f64 / pos as f64;
    let specificity = tn as f64 / neg as f64;
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(BTreeMap::from([
        (Metric::Recall, recall),
        (Metric::Specificity, specificity),
        (Metric::Precision, precision),
        (Metric::F1, f1),
        (Metric::Gmean, (recall * specificity).sqrt()),
        (Metric::BalAcc, (recall + specificity) / 2.0),
    ]))
}

/// All eight metrics for one scored test fold.
pub fn all_metrics(scores: &[f64], labels: &[u8]) -> Result<BTreeMap<Metric, f64>> {
    let mut out = confusion_metrics(scores, labels, THRESHOLD)?;
    out.insert(Metric::AucRoc, auc_roc(scores, labels)?);
    out.insert(Metric::AucPr, auc_pr(scores, labels)?);
    Ok(out)
}

/// Improvement as a share of the headroom left by the baseline,
/// `(over − base) / (1 − base)`; undefined when the baseline is perfect.
pub fn relative_improvement(base: f64, over: f64) -> Option<f64> {
    (base < 1.0).then(|| (over - base) / (1.0 - base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RngSeed;
    use rand::Rng;

    /// Counts positive/negative pairs directly, ties scoring one half.
    fn pair_count_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    /// Sweeps every distinct threshold explicitly.
    fn sweep_ap(scores: &[f64], labels: &[u8]) -> f64 {
        let mut thresholds: Vec<f64> = scores.to_vec();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let pos = labels.iter().filter(|&&l| l == 1).count() as f64;
        let mut prev = 0.0;
        let mut ap = 0.0;
        for t in thresholds {
            let tp = scores.iter().zip(labels).filter(|(s, l)| **s >= t && **l == 1).count() as f64;
            let predicted = scores.iter().filter(|s| **s >= t).count() as f64;
            let recall = tp / pos;
            ap += (recall - prev) * (tp / predicted);
            prev = recall;
        }
        ap
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_roc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc_roc(&[0.3; 6], &[0, 1, 0, 1, 1, 0]).unwrap(), 0.5);
        assert_eq!(auc_roc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert!(matches!(auc_roc(&[0.1, 0.2], &[1, 1]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn auc_matches_pair_counting() {
        let mut r = RngSeed::new(4).rng();
        for _ in 0..100 {
            let n = r.random_range(2..120);
            let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..10) as f64 / 10.0).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
            labels[0] = 0;
            labels[1] = 1;
            let got = auc_roc(&scores, &labels).unwrap();
            assert!((got - pair_count_auc(&scores, &labels)).abs() <= 1e-12);
        }
    }

    #[test]
    fn average_precision_examples() {
        assert_eq!(auc_pr(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert!((auc_pr(&[0.5; 8], &[1, 0, 0, 1, 0, 0, 0, 0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(auc_pr(&[0.5, 0.2], &[0, 0]), Err(Error::UndefinedMetric(_))));
        let mut r = RngSeed::new(6).rng();
        for _ in 0..200 {
            let n = r.random_range(1..40);
            let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
            labels[0] = 1;
            assert!((auc_pr(&scores, &labels).unwrap() - sweep_ap(&scores, &labels)).abs() < 1e-12);
        }
    }

    #[test]
    fn confusion_examples() {
        let perfect = confusion_metrics(&[0.9, 0.1, 0.7, 0.2], &[1, 0, 1, 0], 0.5).unwrap();
        assert!(perfect.values().all(|&v| v == 1.0));

        let none = confusion_metrics(&[0.1, 0.2, 0.3], &[1, 0, 0], 0.5).unwrap();
        assert_eq!(none[&Metric::Recall], 0.0);
        assert_eq!(none[&Metric::Specificity], 1.0);
        assert_eq!(none[&Metric::Gmean], 0.0);
        assert_eq!(none[&Metric::BalAcc], 0.5);
        assert_eq!(none[&Metric::Precision], 0.0);
        assert_eq!(none[&Metric::F1], 0.0);

        // TP=3 FP=1 FN=1 TN=5
        let scores = [0.9, 0.8, 0.7, 0.2, 0.6, 0.1, 0.1, 0.1, 0.1, 0.1];
        let labels = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let m = confusion_metrics(&scores, &labels, 0.5).unwrap();
        assert_eq!(m[&Metric::Precision], 0.75);
        assert_eq!(m[&Metric::Recall], 0.75);
        assert_eq!(m[&Metric::F1], 0.75);
        assert_eq!(m[&Metric::Specificity], 5.0 / 6.0);
        assert!((m[&Metric::Gmean] - (0.75f64 * 5.0 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn relative_improvement_cases() {
        assert!((relative_improvement(0.8, 0.9).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(relative_improvement(0.7, 0.7), Some(0.0));
        assert_eq!(relative_improvement(1.0, 1.0), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn auc_invariant_under_monotone_maps(
                raw in proptest::collection::vec((0u8..20, 0u8..2), 2..60)
            ) {
                let scores: Vec<f64> = raw.iter().map(|(s, _)| f64::from(*s) / 20.0).collect();
                let mut labels: Vec<u8> = raw.iter().map(|(_, l)| *l).collect();
                labels[0] = 0;
                labels[1] = 1;
                let base = auc_roc(&scores, &labels).unwrap();
                let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
                prop_assert_eq!(auc_roc(&mapped, &labels).unwrap(), base);
                prop_assert!((0.0..=1.0).contains(&base));
            }
        }
    }
}
