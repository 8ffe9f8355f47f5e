//! The seven experimental conditions: no resampling, random over- and
//! undersampling, SMOTE, Borderline-SMOTE, ADASYN and Tomek-link cleaning.

mod knn;
mod oversample;
mod tomek;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RngSeed, MAJORITY, MINORITY};
use crate::error::{invalid, Result};

pub use knn::{query_knn, NeighborIndex};
pub use oversample::{
    adasyn, adasyn_traced, borderline_smote, borderline_smote_traced, danger_set, largest_remainder, smote,
    smote_traced, Synthetic,
};
pub use tomek::{tomek_link_pairs, tomek_links};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_M: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodId {
    Baseline,
    Ros,
    Rus,
    Smote,
    BorderlineSmote,
    Adasyn,
    TomekLinks,
}

impl MethodId {
    pub const ALL: [MethodId; 7] = [
        MethodId::Baseline,
        MethodId::Ros,
        MethodId::Rus,
        MethodId::Smote,
        MethodId::BorderlineSmote,
        MethodId::Adasyn,
        MethodId::TomekLinks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Baseline => "BASELINE",
            MethodId::Ros => "ROS",
            MethodId::Rus => "RUS",
            MethodId::Smote => "SMOTE",
            MethodId::BorderlineSmote => "BORDERLINE_SMOTE",
            MethodId::Adasyn => "ADASYN",
            MethodId::TomekLinks => "TOMEK_LINKS",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(format!("unknown resampling method `{s}`")))
    }
}

/// Duplicates minority rows, drawn uniformly with replacement, until the
/// classes are the same size.
pub fn ros(data: &Dataset, rng: RngSeed) -> Result<Dataset> {
    let counts = data.require_both_classes()?;
    let minority = data.indices_of(MINORITY);
    let needed = counts.n_majority.saturating_sub(counts.n_minority);
    let mut r = rng.rng();
    let mut extra = Vec::with_capacity(needed * data.dim());
    for _ in 0..needed {
        let pick = minority[r.random_range(0..minority.len())];
        extra.extend_from_slice(data.row(pick));
    }
    Ok(data.with_appended(&extra, MINORITY))
}

/// Keeps a uniform sample of majority rows, without replacement, as large as
/// the minority class. Row order is preserved.
pub fn rus(data: &Dataset, rng: RngSeed) -> Result<Dataset> {
    let counts = data.require_both_classes()?;
    if counts.n_majority <= counts.n_minority {
        return Ok(data.clone());
    }
    let majority = data.indices_of(MAJORITY);
    let mut keep = vec![false; data.len()];
    for pos in sample(&mut rng.rng(), majority.len(), counts.n_minority) {
        keep[majority[pos]] = true;
    }
    let rows: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels()[i] == MINORITY || keep[i])
        .collect();
    Ok(data.select(&rows))
}

/// Runs `method` with its default hyperparameters.
pub fn apply_method(method: MethodId, data: &Dataset, rng: RngSeed) -> Result<Dataset> {
    match method {
        MethodId::Baseline => Ok(data.clone()),
        MethodId::Ros => ros(data, rng),
        MethodId::Rus => rus(data, rng),
        MethodId::Smote => smote(data, DEFAULT_K, rng),
        MethodId::BorderlineSmote => borderline_smote(data, DEFAULT_K, DEFAULT_M, rng),
        MethodId::Adasyn => adasyn(data, DEFAULT_K, rng),
        MethodId::TomekLinks => tomek_links(data),
    }
}
