//! Classifiers used to score resampled training folds: logistic regression,
//! a CART tree and a random forest.

pub mod forest;
pub mod logistic;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RngSeed};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LearnerKind {
    Logistic,
    Tree,
    Forest,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::Logistic, LearnerKind::Tree, LearnerKind::Forest];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Logistic => "LOGISTIC",
            LearnerKind::Tree => "TREE",
            LearnerKind::Forest => "FOREST",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(format!("unknown learner `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Used by the forest only.
    pub seed: RngSeed,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind, seed: RngSeed) -> Self {
        Self { kind, seed }
    }
}

/// Per-feature mean and standard deviation of a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[f64], dim: usize) -> Self {
        let n = (x.len() / dim) as f64;
        let mut mean = vec![0.0; dim];
        for row in x.chunks_exact(dim) {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in x.chunks_exact(dim) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Self { mean, sd }
    }

    /// Zero-variance features are passed through unscaled.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let dim = self.mean.len();
        let mut out = x.to_vec();
        for row in out.chunks_exact_mut(dim) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.sd) {
                if *s > 0.0 {
                    *v = (*v - m) / s;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Logistic(logistic::LogisticModel),
    Tree(tree::TreeModel),
    Forest(forest::ForestModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub dim: usize,
    /// Training-set statistics; only the logistic model consumes them.
    pub scaling: Standardizer,
    pub fitted: Fitted,
}

pub fn train(spec: &LearnerSpec, data: &Dataset) -> Result<TrainedModel> {
    data.require_both_classes()?;
    let dim = data.dim();
    let scaling = Standardizer::fit(data.features(), dim);
    let fitted = match spec.kind {
        LearnerKind::Logistic => {
            let x = scaling.apply(data.features());
            Fitted::Logistic(logistic::fit(&x, dim, data.labels()))
        }
        LearnerKind::Tree => Fitted::Tree(tree::fit(data.features(), dim, data.labels())),
        LearnerKind::Forest => Fitted::Forest(forest::fit(data.features(), dim, data.labels(), spec.seed)),
    };
    Ok(TrainedModel { dim, scaling, fitted })
}

/// Minority-class probability for each row of a row-major matrix with
/// `dim` columns.
pub fn score(model: &TrainedModel, rows: &[f64], dim: usize) -> Result<Vec<f64>> {
    if dim != model.dim || rows.len() % dim != 0 {
        return Err(invalid(format!(
            "model expects {} columns, got {} values in rows of {dim}",
            model.dim,
            rows.len()
        )));
    }
    Ok(match &model.fitted {
        Fitted::Logistic(m) => {
            let x = model.scaling.apply(rows);
            x.chunks_exact(dim).map(|r| m.score_row(r)).collect()
        }
        Fitted::Tree(t) => rows.chunks_exact(dim).map(|r| t.score_row(r)).collect(),
        Fitted::Forest(f) => rows.chunks_exact(dim).map(|r| f.score_row(r)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn blobs(seed: u64, n: usize, gap: f64, dim: usize) -> Dataset {
        let mut r = RngSeed::new(seed).rng();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = u8::from(i % 4 == 0);
            for j in 0..dim {
                let shift = if j == 0 && label == 1 { gap } else { 0.0 };
                x.push(shift + r.sample::<f64, _>(StandardNormal));
            }
            y.push(label);
        }
        Dataset::new(x, dim, y).unwrap()
    }

    #[test]
    fn logistic_separates_distant_blobs() {
        let d = blobs(1, 200, 12.0, 3);
        let m = train(&LearnerSpec::new(LearnerKind::Logistic, RngSeed::new(0)), &d).unwrap();
        let s = score(&m, d.features(), 3).unwrap();
        let correct = s
            .iter()
            .zip(d.labels())
            .filter(|(p, &y)| (**p >= 0.5) == (y == 1))
            .count();
        assert_eq!(correct, d.len());
    }

    #[test]
    fn logistic_loss_never_increases() {
        let d = blobs(2, 150, 1.0, 4);
        let m = train(&LearnerSpec::new(LearnerKind::Logistic, RngSeed::new(0)), &d).unwrap();
        let Fitted::Logistic(lm) = &m.fitted else { unreachable!() };
        assert!(lm.loss_trace.len() > 1);
        for w in lm.loss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let mut r = RngSeed::new(77).rng();
        for _ in 0..20 {
            let dim = r.random_range(1..5);
            let n = r.random_range(5..30);
            let x: Vec<f64> = (0..n * dim).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
            let p: Vec<f64> = (0..=dim).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
            let lambda = 0.1;
            let (_, g) = logistic::loss_and_gradient(&x, dim, &y, &p, lambda);
            let h = 1e-5;
            for j in 0..=dim {
                let mut up = p.clone();
                let mut dn = p.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (logistic::loss_and_gradient(&x, dim, &y, &up, lambda).0
                    - logistic::loss_and_gradient(&x, dim, &y, &dn, lambda).0)
                    / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1e-3), "{fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn tree_single_split() {
        let d = Dataset::new(vec![0.0, 1.0], 1, vec![0, 1]).unwrap();
        let m = train(&LearnerSpec::new(LearnerKind::Tree, RngSeed::new(0)), &d).unwrap();
        let Fitted::Tree(t) = &m.fitted else { unreachable!() };
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.nodes[0], tree::Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 });
        assert_eq!(score(&m, &[0.0, 1.0], 1).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn tree_prefers_lower_feature_on_ties() {
        // both features split the classes perfectly
        let d = Dataset::new(vec![0.0, 0.0, 1.0, 1.0], 2, vec![0, 1]).unwrap();
        let m = train(&LearnerSpec::new(LearnerKind::Tree, RngSeed::new(0)), &d).unwrap();
        let Fitted::Tree(t) = &m.fitted else { unreachable!() };
        assert!(matches!(t.nodes[0], tree::Node::Split { feature: 0, .. }));
    }

    #[test]
    fn tree_depth_is_capped() {
        let d = blobs(3, 400, 0.2, 2);
        let m = train(&LearnerSpec::new(LearnerKind::Tree, RngSeed::new(0)), &d).unwrap();
        let Fitted::Tree(t) = &m.fitted else { unreachable!() };
        assert!(t.depth() <= tree::MAX_DEPTH);
    }

    #[test]
    fn forest_is_deterministic_and_bounded() {
        let d = blobs(4, 120, 1.5, 4);
        let spec = LearnerSpec::new(LearnerKind::Forest, RngSeed::new(9));
        let a = train(&spec, &d).unwrap();
        let b = train(&spec, &d).unwrap();
        assert_eq!(a, b);
        let Fitted::Forest(f) = &a.fitted else { unreachable!() };
        assert_eq!(f.trees.len(), forest::N_TREES);
        let s = score(&a, d.features(), 4).unwrap();
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        let row = d.row(0);
        let mean = f.trees.iter().map(|t| t.score_row(row)).sum::<f64>() / 100.0;
        assert_eq!(s[0], mean);
    }

    #[test]
    fn scoring_is_pure() {
        let d = blobs(5, 80, 1.0, 3);
        for kind in LearnerKind::ALL {
            let m = train(&LearnerSpec::new(kind, RngSeed::new(1)), &d).unwrap();
            let once = score(&m, d.row(3), 3).unwrap();
            assert_eq!(once, score(&m, d.row(3), 3).unwrap());
            assert!((0.0..=1.0).contains(&once[0]));
        }
    }

    #[test]
    fn errors() {
        let one_class = Dataset::new(vec![0.0, 1.0, 2.0, 3.0], 1, vec![0; 4]).unwrap();
        assert!(matches!(
            train(&LearnerSpec::new(LearnerKind::Tree, RngSeed::new(0)), &one_class),
            Err(Error::Degenerate(_))
        ));
        let d = blobs(6, 40, 1.0, 3);
        let m = train(&LearnerSpec::new(LearnerKind::Logistic, RngSeed::new(0)), &d).unwrap();
        assert!(matches!(score(&m, &[0.0, 1.0], 2), Err(Error::InvalidArgument(_))));
        assert_eq!("forest".parse::<LearnerKind>().unwrap(), LearnerKind::Forest);
    }

    #[test]
    fn zero_variance_feature_passes_through() {
        let s = Standardizer::fit(&[1.0, 5.0, 3.0, 5.0], 2);
        assert_eq!(s.sd[1], 0.0);
        assert_eq!(s.apply(&[2.0, 5.0]), vec![0.0, 5.0]);
    }
}
