//! Rule-based choice of a resampling strategy from a measured data profile.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::profile::DataProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Recommendation {
    /// SMOTE or ADASYN.
    StructurePreserving,
    /// Tomek-link cleaning.
    Cleaning,
    /// Borderline-SMOTE or ADASYN.
    Boundary,
    /// No resampling or random oversampling.
    Simple,
}

impl Recommendation {
    pub fn name(self) -> &'static str {
        match self {
            Recommendation::StructurePreserving => "STRUCTURE_PRESERVING",
            Recommendation::Cleaning => "CLEANING",
            Recommendation::Boundary => "BOUNDARY",
            Recommendation::Simple => "SIMPLE",
        }
    }
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    LowSeparabilityModerateImbalance,
    HighSeparabilityHighImbalance,
    MultipleClusters,
    Fallback,
}

/// Rule thresholds. All comparisons are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low_sep: f64,
    pub moderate_ir: f64,
    pub high_sep: f64,
    pub high_ir: f64,
    pub min_clusters: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { low_sep: 0.5, moderate_ir: 20.0, high_sep: 1.0, high_ir: 10.0, min_clusters: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDecision {
    pub profile: DataProfile,
    pub branch: Branch,
    pub recommendation: Recommendation,
}

/// Branch and recommendation for raw profile values, rules tried in order.
pub fn decide(separability: f64, ir: f64, clusters: usize, t: &Thresholds) -> (Branch, Recommendation) {
    if separability < t.low_sep && ir < t.moderate_ir {
        (Branch::LowSeparabilityModerateImbalance, Recommendation::StructurePreserving)
    } else if separability > t.high_sep && ir > t.high_ir {
        (Branch::HighSeparabilityHighImbalance, Recommendation::Cleaning)
    } else if clusters >= t.min_clusters {
        (Branch::MultipleClusters, Recommendation::Boundary)
    } else {
        (Branch::Fallback, Recommendation::Simple)
    }
}

pub fn select_with(profile: &DataProfile, t: &Thresholds) -> SelectionDecision {
    let (branch, recommendation) = decide(profile.separability, profile.ir, profile.cluster_estimate, t);
    SelectionDecision { profile: profile.clone(), branch, recommendation }
}

pub fn select(profile: &DataProfile) -> SelectionDecision {
    select_with(profile, &Thresholds::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub d_sep: f64,
    pub d_ir: f64,
    pub recommendation: Recommendation,
    pub changed: bool,
    /// Whether the shifted point lies across a rule threshold from the
    /// original.
    pub crosses_threshold: bool,
}

fn side(v: f64, threshold: f64) -> std::cmp::Ordering {
    v.total_cmp(&threshold)
}

/// Re-runs the rules with separability shifted by ±`d_sep` and imbalance by
/// ±`d_ir` (nine points including the original).
pub fn sensitivity(profile: &DataProfile, t: &Thresholds, d_sep: f64, d_ir: f64) -> Vec<Perturbation> {
    let (_, base) = decide(profile.separability, profile.ir, profile.cluster_estimate, t);
    let mut out = Vec::new();
    for ds in [-d_sep, 0.0, d_sep] {
        for di in [-d_ir, 0.0, d_ir] {
            let (s, ir) = (profile.separability + ds, profile.ir + di);
            let (_, rec) = decide(s, ir, profile.cluster_estimate, t);
            let crosses = side(s, t.low_sep) != side(profile.separability, t.low_sep)
                || side(s, t.high_sep) != side(profile.separability, t.high_sep)
                || side(ir, t.moderate_ir) != side(profile.ir, t.moderate_ir)
                || side(ir, t.high_ir) != side(profile.ir, t.high_ir);
            out.push(Perturbation { d_sep: ds, d_ir: di, recommendation: rec, changed: rec != base, crosses_threshold: crosses });
        }
    }
    out
}
