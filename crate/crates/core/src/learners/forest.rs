use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{self, TreeModel};
use crate::data::RngSeed;

pub const N_TREES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
}

/// Bagged CART trees with `⌈√d⌉` candidate features per split. Tree `t`
/// draws its bootstrap and feature subsets from the stream `tree{t}`.
pub fn fit(x: &[f64], dim: usize, y: &[u8], seed: RngSeed) -> ForestModel {
    let n = y.len();
    let max_features = (dim as f64).sqrt().ceil() as usize;
    let trees = (0..N_TREES)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive(&format!("tree{t}")).rng();
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            tree::fit_rows(x, dim, y, rows, Some(max_features), Some(&mut rng))
        })
        .collect();
    ForestModel { trees }
}

impl ForestModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}
