//! Gaussian-mixture datasets with independently controlled imbalance ratio,
//! class separability, minority cluster count, size and dimension.
//!
//! The majority class is one isotropic unit Gaussian at the origin. The
//! minority class is split across `k` unit Gaussians whose centers sit at
//! distance [`CLUSTER_RADIUS`] from a minority centroid placed at distance δ
//! along the first axis. Noise is drawn once per seed and standardized
//! (each majority feature, and each minority cluster's features, get zero
//! sample mean and unit sample variance), so δ can be searched without
//! changing the noise realization.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RngSeed, MAJORITY, MINORITY};
use crate::error::{invalid, Error, Result};
use crate::profile::{class_moments, separability_of};

pub const CLUSTER_RADIUS: f64 = 3.0;
pub const DEFAULT_DIM: usize = 5;
pub const DEFAULT_N_TOTAL: usize = 1100;
pub const SEP_RANGE: (f64, f64) = (0.1, 5.0);

pub const FACTORIAL_IR: [f64; 8] = [2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 80.0];
pub const FACTORIAL_SEP: [f64; 6] = [0.3, 0.5, 0.8, 1.0, 1.5, 2.0];
pub const FACTORIAL_CLUSTERS: [usize; 4] = [1, 2, 3, 5];

const DELTA_MAX: f64 = 20.0;
const SEP_TOLERANCE: f64 = 1e-3;
const MAX_BISECTIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub ir: f64,
    pub sep_target: f64,
    pub clusters: usize,
    pub n_total: usize,
    pub dim: usize,
    pub seed: RngSeed,
}

impl GenSpec {
    pub fn new(ir: f64, sep_target: f64, clusters: usize, seed: RngSeed) -> Self {
        Self { ir, sep_target, clusters, n_total: DEFAULT_N_TOTAL, dim: DEFAULT_DIM, seed }
    }

    /// `(n_majority, n_minority)`. The minority count is
    /// `round(n_total / (1 + ir))` and the majority is `round(ir · n_minority)`,
    /// so integral ratios are realized exactly; `n_total` is nominal.
    pub fn class_sizes(&self) -> (usize, usize) {
        let n_min = (self.n_total as f64 / (1.0 + self.ir)).round() as usize;
        let n_maj = (self.ir * n_min as f64).round() as usize;
        (n_maj, n_min)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ir.is_finite() && self.ir > 0.0) {
            return Err(invalid(format!("ir must be positive, got {}", self.ir)));
        }
        if !(SEP_RANGE.0..=SEP_RANGE.1).contains(&self.sep_target) {
            return Err(invalid(format!(
                "separability target {} outside [{}, {}]",
                self.sep_target, SEP_RANGE.0, SEP_RANGE.1
            )));
        }
        if self.clusters == 0 {
            return Err(invalid("at least one minority cluster required"));
        }
        if self.n_total < 20 {
            return Err(invalid(format!("n_total {} below 20", self.n_total)));
        }
        if self.dim < 2 {
            return Err(invalid(format!("dim {} below 2", self.dim)));
        }
        let (n_maj, n_min) = self.class_sizes();
        if n_min < 2 * self.clusters {
            return Err(invalid(format!(
                "{n_min} minority rows cannot give {} clusters two points each",
                self.clusters
            )));
        }
        if n_maj < 2 {
            return Err(invalid(format!("only {n_maj} majority rows")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GenOutcome {
    pub dataset: Dataset,
    pub realized_sep: f64,
    pub realized_ir: f64,
    pub delta_used: f64,
}

/// Sidecar metadata written next to a generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMeta {
    pub ir: f64,
    pub sep_target: f64,
    pub realized_sep: f64,
    pub realized_ir: f64,
    pub clusters: usize,
    pub n_total: usize,
    pub dim: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub delta_used: f64,
}

impl GenMeta {
    pub fn new(spec: &GenSpec, outcome: &GenOutcome) -> Self {
        Self {
            ir: spec.ir,
            sep_target: spec.sep_target,
            realized_sep: outcome.realized_sep,
            realized_ir: outcome.realized_ir,
            clusters: spec.clusters,
            n_total: spec.n_total,
            dim: spec.dim,
            seed: spec.seed.seed,
            stream_id: spec.seed.stream_id,
            delta_used: outcome.delta_used,
        }
    }
}

/// Standardized noise for one spec, plus the fixed cluster offsets.
#[derive(Debug, Clone)]
pub struct NoiseCache {
    dim: usize,
    /// Majority rows, final positions.
    majority: Vec<f64>,
    /// Minority rows at δ = 0 (cluster offset + noise).
    minority: Vec<f64>,
}

impl NoiseCache {
    pub fn draw(spec: &GenSpec) -> Self {
        let (n_maj, n_min) = spec.class_sizes();
        let dim = spec.dim;
        let mut rng = spec.seed.rng();
        let mut majority = standard_block(&mut rng, n_maj, dim);
        standardize(&mut majority, dim);

        let offsets = cluster_offsets(spec.clusters, dim);
        let mut minority = Vec::with_capacity(n_min * dim);
        for (c, size) in cluster_sizes(n_min, spec.clusters).into_iter().enumerate() {
            let mut block = standard_block(&mut rng, size, dim);
            standardize(&mut block, dim);
            for row in block.chunks_exact_mut(dim) {
                for (v, o) in row.iter_mut().zip(&offsets[c * dim..(c + 1) * dim]) {
                    *v += o;
                }
            }
            minority.extend(block);
        }
        Self { dim, majority, minority }
    }

    fn minority_at(&self, delta: f64) -> Vec<f64> {
        let mut rows = self.minority.clone();
        for row in rows.chunks_exact_mut(self.dim) {
            row[0] += delta;
        }
        rows
    }
}

fn standard_block(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<f64> {
    (0..n * dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Zero sample mean and unit sample variance per column (blocks of ≥ 2 rows).
fn standardize(block: &mut [f64], dim: usize) {
    let n = block.len() / dim;
    if n < 2 {
        return;
    }
    for j in 0..dim {
        let mean = block.iter().skip(j).step_by(dim).sum::<f64>() / n as f64;
        let var = block
            .iter()
            .skip(j)
            .step_by(dim)
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        let sd = var.sqrt();
        for v in block.iter_mut().skip(j).step_by(dim) {
            *v -= mean;
            if sd > 0.0 {
                *v /= sd;
            }
        }
    }
}

/// Sizes differ by at most one; earlier clusters take the remainder.
pub fn cluster_sizes(n_min: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n_min / k + usize::from(c < n_min % k)).collect()
}

/// Row-major `k × dim` offsets of the cluster centers from the minority
/// centroid, all at distance [`CLUSTER_RADIUS`] and orthogonal to axis 0.
/// Centers form a regular simplex when `k − 1` axes are free, otherwise a
/// regular k-gon in the plane of axes 1 and 2 (axes 0 and 1 when `dim == 2`).
/// Zero for `k == 1`.
pub fn cluster_offsets(k: usize, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * dim];
    if k < 2 {
        return out;
    }
    if k - 1 < dim {
        for (c, coords) in simplex_vertices(k).into_iter().enumerate() {
            for (j, v) in coords.into_iter().enumerate() {
                out[c * dim + 1 + j] = CLUSTER_RADIUS * v;
            }
        }
        return out;
    }
    let (a, b) = if dim >= 3 { (1, 2) } else { (0, 1) };
    for c in 0..k {
        let theta = 2.0 * std::f64::consts::PI * c as f64 / k as f64;
        out[c * dim + a] = CLUSTER_RADIUS * theta.cos();
        out[c * dim + b] = CLUSTER_RADIUS * theta.sin();
    }
    out
}

/// `k` unit vectors in `k − 1` dimensions with equal pairwise distances and
/// zero mean: the centered standard basis of R^k expressed in an orthonormal
/// basis of its span.
fn simplex_vertices(k: usize) -> Vec<Vec<f64>> {
    let centered: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| f64::from(u8::from(i == j)) - 1.0 / k as f64).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k - 1);
    for v in centered.iter().take(k - 1) {
        let mut u = v.clone();
        for b in &basis {
            let p = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = dot(&u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        basis.push(u);
    }
    centered
        .iter()
        .map(|v| {
            let coords: Vec<f64> = basis.iter().map(|b| dot(v, b)).collect();
            let norm = dot(&coords, &coords).sqrt();
            coords.into_iter().map(|c| c / norm).collect()
        })
        .collect()
}

/// Finds δ ∈ [0, 20] whose separability on the cached draws is within 1e-3
/// of the target, by bisection. Separability is monotone in δ here because
/// the minority class only translates along the first axis.
pub fn calibrate_delta(spec: &GenSpec, cache: &NoiseCache) -> Result<f64> {
    let dim = cache.dim;
    let (mu_maj, var_maj) = class_moments(&cache.majority, dim);
    let (mu_min0, var_min) = class_moments(&cache.minority, dim);
    let pooled = ((var_maj + var_min) / 2.0).sqrt();
    let sep_at = |delta: f64| -> f64 {
        let dist2: f64 = (0..dim)
            .map(|j| {
                let shift = if j == 0 { delta } else { 0.0 };
                let diff = mu_min0[j] + shift - mu_maj[j];
                diff * diff
            })
            .sum();
        dist2.sqrt() / pooled
    };
    let target = spec.sep_target;
    let (mut lo, mut hi) = (0.0, DELTA_MAX);
    let (s_lo, s_hi) = (sep_at(lo), sep_at(hi));
    if (s_lo - target).abs() <= SEP_TOLERANCE {
        return Ok(lo);
    }
    if s_lo > target || s_hi < target {
        return Err(Error::Calibration(format!(
            "target separability {target} outside reachable range [{s_lo:.4}, {s_hi:.4}]"
        )));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let s = sep_at(mid);
        if (s - target).abs() <= SEP_TOLERANCE {
            return Ok(mid);
        }
        if s < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration(format!(
        "bisection did not reach separability {target} within {MAX_BISECTIONS} steps"
    )))
}

pub fn generate(spec: &GenSpec) -> Result<GenOutcome> {
    spec.validate()?;
    let cache = NoiseCache::draw(spec);
    let delta = calibrate_delta(spec, &cache)?;
    let minority = cache.minority_at(delta);
    let dim = spec.dim;
    let n_maj = cache.majority.len() / dim;
    let n_min = minority.len() / dim;
    let realized_sep = separability_of(&cache.majority, &minority, dim)?;
    let mut labels = vec![MAJORITY; n_maj];
    labels.extend(std::iter::repeat_n(MINORITY, n_min));
    let dataset = Dataset::new([cache.majority, minority].concat(), dim, labels)?;
    Ok(GenOutcome {
        dataset,
        realized_sep,
        realized_ir: n_maj as f64 / n_min as f64,
        delta_used: delta,
    })
}

#[derive(Debug, Clone)]
pub struct FactorialSpec {
    pub spec: GenSpec,
    /// Reason the spec cannot be generated, if any.
    pub violation: Option<String>,
}

/// The 8 × 6 × 4 grid over imbalance ratio, separability and cluster count
/// at default size and dimension, each with its own derived stream.
pub fn factorial_specs(seed: RngSeed) -> Vec<FactorialSpec> {
    let mut out = Vec::with_capacity(FACTORIAL_IR.len() * FACTORIAL_SEP.len() * FACTORIAL_CLUSTERS.len());
    for &ir in &FACTORIAL_IR {
        for &sep in &FACTORIAL_SEP {
            for &k in &FACTORIAL_CLUSTERS {
                let stream = seed.derive(&format!("factorial/ir={ir}/sep={sep}/k={k}"));
                let spec = GenSpec::new(ir, sep, k, stream);
                let violation = spec.validate().err().map(|e| e.to_string());
                out.push(FactorialSpec { spec, violation });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{class_counts, imbalance_ratio};
    use crate::profile::separability;

    #[test]
    fn constructed_counts() {
        let spec = GenSpec { n_total: 1100, ..GenSpec::new(10.0, 1.0, 3, RngSeed::new(1)) };
        let out = generate(&spec).unwrap();
        let c = class_counts(&out.dataset);
        assert_eq!((c.n_majority, c.n_minority), (1000, 100));
        assert_eq!(out.realized_ir, 10.0);
    }

    #[test]
    fn realized_separability_in_band() {
        let spec = GenSpec::new(10.0, 1.0, 3, RngSeed::new(17));
        let out = generate(&spec).unwrap();
        let measured = separability(&out.dataset).unwrap();
        assert!((0.95..=1.05).contains(&measured), "{measured}");
        assert!((measured - out.realized_sep).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_has_no_spread() {
        assert!(cluster_offsets(1, 5).iter().all(|&v| v == 0.0));
        let offs = cluster_offsets(3, 5);
        for c in offs.chunks_exact(5) {
            let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - CLUSTER_RADIUS).abs() < 1e-12);
            assert_eq!(c[0], 0.0);
        }
    }

    #[test]
    fn single_cluster_delta_tracks_target() {
        // with unit variances in both classes, S = δ
        let spec = GenSpec { n_total: 10_000, dim: 2, ..GenSpec::new(1.0, 1.3, 1, RngSeed::new(3)) };
        let out = generate(&spec).unwrap();
        assert!((out.delta_used - 1.3).abs() < 2e-3, "{}", out.delta_used);
    }

    #[test]
    fn tiny_target_gives_coincident_centroids() {
        let spec = GenSpec { sep_target: 1e-4, ..GenSpec::new(4.0, 1.0, 1, RngSeed::new(3)) };
        let cache = NoiseCache::draw(&spec);
        assert!(calibrate_delta(&spec, &cache).unwrap() < 2e-3);
    }

    #[test]
    fn more_clusters_lower_separability_at_fixed_delta() {
        let at = |k: usize| {
            let spec = GenSpec::new(5.0, 1.0, k, RngSeed::new(12));
            let cache = NoiseCache::draw(&spec);
            separability_of(&cache.majority, &cache.minority_at(2.0), spec.dim).unwrap()
        };
        assert!(at(5) < at(1));
    }

    #[test]
    fn unreachable_target_is_a_calibration_error() {
        let spec = GenSpec { sep_target: 50.0, ..GenSpec::new(4.0, 1.0, 1, RngSeed::new(3)) };
        let cache = NoiseCache::draw(&spec);
        assert!(matches!(calibrate_delta(&spec, &cache), Err(Error::Calibration(_))));
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = GenSpec::new(10.0, 1.0, 3, RngSeed::new(1));
        assert!(generate(&GenSpec { sep_target: 6.0, ..base.clone() }).is_err());
        assert!(generate(&GenSpec { dim: 1, ..base.clone() }).is_err());
        assert!(generate(&GenSpec { n_total: 19, ..base.clone() }).is_err());
        // 200 / 81 rounds to 2 minority rows: too few for 3 clusters
        assert!(matches!(
            generate(&GenSpec { ir: 80.0, n_total: 200, ..base }),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn byte_identical_output() {
        let spec = GenSpec::new(15.0, 0.8, 5, RngSeed::new(99));
        let a = generate(&spec).unwrap().dataset.to_csv_string();
        let b = generate(&spec).unwrap().dataset.to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn factorial_grid_shape() {
        let grid = factorial_specs(RngSeed::new(17));
        assert_eq!(grid.len(), 192);
        let mut triples: Vec<String> = grid
            .iter()
            .map(|f| format!("{}/{}/{}", f.spec.ir, f.spec.sep_target, f.spec.clusters))
            .collect();
        triples.sort();
        triples.dedup();
        assert_eq!(triples.len(), 192);
        // brute-force check of the two-points-per-cluster rule
        for f in &grid {
            let n_min = (1100.0 / (1.0 + f.spec.ir)).round() as usize;
            assert_eq!(f.violation.is_some(), n_min < 2 * f.spec.clusters);
        }
        let small = GenSpec { n_total: 100, ..GenSpec::new(80.0, 1.0, 5, RngSeed::new(1)) };
        assert!(small.validate().is_err());
    }

    #[test]
    fn cluster_sizes_balanced() {
        for n in 10..40 {
            for k in 1..=5 {
                let s = cluster_sizes(n, k);
                assert_eq!(s.iter().sum::<usize>(), n);
                assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn integral_ratios_are_exact() {
        for &ir in &FACTORIAL_IR {
            let (n_maj, n_min) = GenSpec::new(ir, 1.0, 1, RngSeed::new(0)).class_sizes();
            let c = crate::data::ClassCounts { n_majority: n_maj, n_minority: n_min };
            assert_eq!(imbalance_ratio(c).unwrap(), ir);
        }
    }
}
