//! Measured dataset characteristics: imbalance ratio, class separability,
//! minority size and minority cluster structure.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{class_counts, imbalance_ratio, Dataset, RngSeed, MAJORITY, MINORITY};
use crate::error::{degenerate, invalid, Result};

/// Minimum mean silhouette for accepting a multi-cluster minority.
pub const SILHOUETTE_THRESHOLD: f64 = 0.35;
/// Largest cluster count tried by [`estimate_clusters`].
pub const MAX_CLUSTERS: usize = 5;
/// Below this many minority rows the estimate is 1 without clustering.
pub const MIN_ROWS_FOR_CLUSTERING: usize = 10;
/// Silhouette is evaluated on at most this many minority rows.
pub const SILHOUETTE_SAMPLE: usize = 500;

const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub ir: f64,
    pub separability: f64,
    pub n_minority: usize,
    pub cluster_estimate: usize,
    /// `None` when the estimate is a single cluster.
    pub silhouette_best: Option<f64>,
}

/// Per-class mean vector and the mean over features of the unbiased
/// per-feature variance.
pub(crate) fn class_moments(rows: &[f64], dim: usize) -> (Vec<f64>, f64) {
    let n = rows.len() / dim;
    let mut mean = vec![0.0; dim];
    for row in rows.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut ss = 0.0;
    for row in rows.chunks_exact(dim) {
        for (m, v) in mean.iter().zip(row) {
            ss += (v - m) * (v - m);
        }
    }
    (mean, ss / ((n - 1) as f64 * dim as f64))
}

/// Separability from row-major class blocks. Both blocks need ≥ 2 rows.
pub(crate) fn separability_of(majority: &[f64], minority: &[f64], dim: usize) -> Result<f64> {
    if majority.len() < 2 * dim || minority.len() < 2 * dim {
        return Err(degenerate("separability needs at least 2 rows per class"));
    }
    let (mu_maj, var_maj) = class_moments(majority, dim);
    let (mu_min, var_min) = class_moments(minority, dim);
    let dist = mu_maj
        .iter()
        .zip(&mu_min)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let pooled = ((var_maj + var_min) / 2.0).sqrt();
    if pooled == 0.0 {
        return Err(degenerate("both classes have zero within-class variance"));
    }
    Ok(dist / pooled)
}

fn class_block(data: &Dataset, label: u8) -> Vec<f64> {
    data.indices_of(label)
        .into_iter()
        .flat_map(|i| data.row(i).iter().copied())
        .collect()
}

/// Distance between class centroids over the pooled within-class spread,
/// `‖μ_maj − μ_min‖ / sqrt((σ²_maj + σ²_min) / 2)`.
pub fn separability(data: &Dataset) -> Result<f64> {
    separability_of(&class_block(data, MAJORITY), &class_block(data, MINORITY), data.dim())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignments: Vec<usize>,
    /// Row-major, `k × dim`.
    pub centers: Vec<f64>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_seeds<R: Rng>(points: &[f64], dim: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let n = points.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut centers = Vec::with_capacity(k * dim);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    taken[first] = true;
    centers.extend_from_slice(row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(row(i), row(first))).collect();
    while centers.len() < k * dim {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // all remaining points coincide with a center
            (0..n).find(|&i| !taken[i]).expect("k <= n")
        };
        taken[next] = true;
        centers.extend_from_slice(row(next));
        let c = &centers[centers.len() - dim..];
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(row(i), c));
        }
    }
    centers
}

fn lloyd(points: &[f64], dim: usize, k: usize, mut centers: Vec<f64>) -> KMeansFit {
    let n = points.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let nearest = |centers: &[f64], p: &[f64]| -> (usize, f64) {
        centers
            .chunks_exact(dim)
            .enumerate()
            .map(|(c, center)| (c, sq_dist(p, center)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    };
    let mut assignments: Vec<usize> = (0..n).map(|i| nearest(&centers, row(i)).0).collect();
    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster at the point worst served by its center
                let far = (0..n)
                    .map(|i| (i, sq_dist(row(i), &centers[assignments[i] * dim..(assignments[i] + 1) * dim])))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                    .0;
                centers[c * dim..(c + 1) * dim].copy_from_slice(row(far));
            } else {
                for j in 0..dim {
                    centers[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
                }
            }
        }
        let next: Vec<usize> = (0..n).map(|i| nearest(&centers, row(i)).0).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let inertia = (0..n)
        .map(|i| sq_dist(row(i), &centers[assignments[i] * dim..(assignments[i] + 1) * dim]))
        .sum();
    KMeansFit { assignments, centers, inertia }
}

/// Lloyd's algorithm from k-means++ seeds, best of 10 restarts by inertia
/// (earliest restart wins ties).
pub fn kmeans(points: &[f64], dim: usize, k: usize, rng: RngSeed) -> Result<KMeansFit> {
    if dim == 0 || points.is_empty() || points.len() % dim != 0 {
        return Err(invalid("kmeans needs a non-empty row-major matrix"));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(invalid(format!("kmeans with k = {k} on {n} points")));
    }
    let mut best: Option<KMeansFit> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut r = rng.derive(&format!("restart{restart}")).rng();
        let seeds = plus_plus_seeds(points, dim, k, &mut r);
        let fit = lloyd(points, dim, k, seeds);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Mean silhouette coefficient. Points in singleton clusters score 0.
pub fn silhouette(points: &[f64], dim: usize, assignments: &[usize], k: usize) -> f64 {
    let n = assignments.len();
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                sums[assignments[j]] += sq_dist(row(i), row(j)).sqrt();
            }
        }
        let own = assignments[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() {
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    total / n as f64
}

/// Number of minority clusters (1..=5) and the winning silhouette.
pub fn estimate_clusters(data: &Dataset, rng: RngSeed) -> (usize, Option<f64>) {
    let minority = class_block(data, MINORITY);
    let dim = data.dim();
    let n = minority.len() / dim;
    if n < MIN_ROWS_FOR_CLUSTERING {
        return (1, None);
    }
    let probe: Vec<usize> = if n > SILHOUETTE_SAMPLE {
        let mut idx = sample(&mut rng.derive("silhouette").rng(), n, SILHOUETTE_SAMPLE).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let probe_points: Vec<f64> = probe
        .iter()
        .flat_map(|&i| minority[i * dim..(i + 1) * dim].iter().copied())
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for k in 2..=MAX_CLUSTERS.min(n) {
        let fit = match kmeans(&minority, dim, k, rng.derive(&format!("k{k}"))) {
            Ok(fit) => fit,
            Err(_) => continue,
        };
        let labels: Vec<usize> = probe.iter().map(|&i| fit.assignments[i]).collect();
        let s = silhouette(&probe_points, dim, &labels, k);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((k, s));
        }
    }
    match best {
        Some((k, s)) if s >= SILHOUETTE_THRESHOLD => (k, Some(s)),
        _ => (1, None),
    }
}

pub fn profile_dataset(data: &Dataset, rng: RngSeed) -> Result<DataProfile> {
    let counts = class_counts(data);
    let separability = separability(data)?;
    let (cluster_estimate, silhouette_best) = estimate_clusters(data, rng.derive("clusters"));
    Ok(DataProfile {
        ir: imbalance_ratio(counts)?,
        separability,
        n_minority: counts.n_minority,
        cluster_estimate,
        silhouette_best,
    })
}
