//! SMOTE-family oversamplers. Each synthetic row is
//! `base + gap · (neighbor − base)` with `gap` uniform on [0, 1), `base` a
//! minority row and `neighbor` one of its nearest minority neighbors.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::knn::NeighborIndex;
use crate::data::{class_counts, Dataset, RngSeed, MAJORITY, MINORITY};
use crate::error::{degenerate, Result};

/// Provenance of one synthetic row; indices refer to rows of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synthetic {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

/// Minority rows and each one's `k_eff` nearest minority neighbors, both as
/// input row indices.
struct MinorityNeighborhood {
    rows: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl MinorityNeighborhood {
    fn build(data: &Dataset, k: usize) -> Result<Self> {
        let rows = data.indices_of(MINORITY);
        if rows.len() < 2 {
            return Err(degenerate(format!(
                "oversampling needs at least 2 minority rows, found {}",
                rows.len()
            )));
        }
        let k_eff = k.min(rows.len() - 1).max(1);
        let block: Vec<f64> = rows.iter().flat_map(|&i| data.row(i).iter().copied()).collect();
        let index = NeighborIndex::new(&block, data.dim());
        let neighbors = (0..rows.len())
            .map(|p| {
                index
                    .neighbors_of(p, k_eff)
                    .map(|nn| nn.into_iter().map(|q| rows[q]).collect())
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Ok(Self { rows, neighbors })
    }
}

fn deficit(data: &Dataset) -> usize {
    let c = class_counts(data);
    c.n_majority.saturating_sub(c.n_minority)
}

fn draw(hood: &MinorityNeighborhood, pos: usize, rng: &mut ChaCha8Rng) -> Synthetic {
    let nn = &hood.neighbors[pos];
    let neighbor = nn[rng.random_range(0..nn.len())];
    let gap = rng.random::<f64>();
    Synthetic { base: hood.rows[pos], neighbor, gap }
}

fn materialize(data: &Dataset, made: &[Synthetic]) -> Dataset {
    let dim = data.dim();
    let mut rows = Vec::with_capacity(made.len() * dim);
    for s in made {
        let (b, n) = (data.row(s.base), data.row(s.neighbor));
        rows.extend(b.iter().zip(n).map(|(x, y)| x + s.gap * (y - x)));
    }
    data.with_appended(&rows, MINORITY)
}

/// Number of majority rows among each minority row's `m` nearest neighbors
/// in the whole dataset, aligned with `data.indices_of(MINORITY)`.
fn majority_neighbor_counts(data: &Dataset, m: usize) -> Result<Vec<usize>> {
    let index = NeighborIndex::over(data);
    data.indices_of(MINORITY)
        .into_iter()
        .map(|i| {
            index
                .neighbors_of(i, m)
                .map(|nn| nn.iter().filter(|&&j| data.labels()[j] == MAJORITY).count())
        })
        .collect()
}

pub fn smote_traced(data: &Dataset, k: usize, rng: RngSeed) -> Result<(Dataset, Vec<Synthetic>)> {
    let hood = MinorityNeighborhood::build(data, k)?;
    let needed = deficit(data);
    let mut r = rng.rng();
    let made: Vec<Synthetic> = (0..needed)
        .map(|_| {
            let pos = r.random_range(0..hood.rows.len());
            draw(&hood, pos, &mut r)
        })
        .collect();
    Ok((materialize(data, &made), made))
}

/// Appends `n_maj − n_min` interpolated minority rows.
pub fn smote(data: &Dataset, k: usize, rng: RngSeed) -> Result<Dataset> {
    smote_traced(data, k, rng).map(|(d, _)| d)
}

/// Input row indices of minority rows whose `m_eff` whole-data neighborhood
/// has at least half, but not all, majority rows.
pub fn danger_set(data: &Dataset, m: usize) -> Result<Vec<usize>> {
    let minority = data.indices_of(MINORITY);
    if minority.len() < 2 {
        return Err(degenerate("borderline detection needs at least 2 minority rows"));
    }
    let m_eff = m.min(data.len() - 1).max(1);
    let counts = majority_neighbor_counts(data, m_eff)?;
    Ok(minority
        .into_iter()
        .zip(counts)
        .filter(|&(_, c)| c as f64 >= m_eff as f64 / 2.0 && c < m_eff)
        .map(|(i, _)| i)
        .collect())
}

pub fn borderline_smote_traced(
    data: &Dataset,
    k: usize,
    m: usize,
    rng: RngSeed,
) -> Result<(Dataset, Vec<Synthetic>)> {
    let hood = MinorityNeighborhood::build(data, k)?;
    let danger = danger_set(data, m)?;
    if danger.is_empty() {
        return smote_traced(data, k, rng);
    }
    let positions: Vec<usize> = danger
        .iter()
        .map(|i| hood.rows.binary_search(i).expect("danger rows are minority rows"))
        .collect();
    let needed = deficit(data);
    let mut r = rng.rng();
    let made: Vec<Synthetic> = (0..needed)
        .map(|_| {
            let pos = positions[r.random_range(0..positions.len())];
            draw(&hood, pos, &mut r)
        })
        .collect();
    Ok((materialize(data, &made), made))
}

/// Borderline-SMOTE (variant 1): only minority rows in the danger set act as
/// interpolation bases. Falls back to SMOTE when the danger set is empty.
pub fn borderline_smote(data: &Dataset, k: usize, m: usize, rng: RngSeed) -> Result<Dataset> {
    borderline_smote_traced(data, k, m, rng).map(|(d, _)| d)
}

/// Integer allocation of `total` proportional to `weights` (which need not
/// be normalized). Remaining units after flooring go to the largest
/// fractional parts, lower index first on ties.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

pub fn adasyn_traced(data: &Dataset, k: usize, rng: RngSeed) -> Result<(Dataset, Vec<Synthetic>)> {
    let hood = MinorityNeighborhood::build(data, k)?;
    let k_eff = k.min(hood.rows.len() - 1).max(1);
    let hardness: Vec<f64> = majority_neighbor_counts(data, k_eff)?
        .into_iter()
        .map(|c| c as f64 / k_eff as f64)
        .collect();
    if hardness.iter().sum::<f64>() == 0.0 {
        return smote_traced(data, k, rng);
    }
    let alloc = largest_remainder(&hardness, deficit(data));
    let mut r = rng.rng();
    let mut made = Vec::with_capacity(alloc.iter().sum());
    for (pos, &g) in alloc.iter().enumerate() {
        for _ in 0..g {
            made.push(draw(&hood, pos, &mut r));
        }
    }
    Ok((materialize(data, &made), made))
}

/// ADASYN with full balance: minority rows with more majority neighbors get
/// proportionally more synthetic rows. Falls back to SMOTE when no minority
/// row has a majority neighbor.
pub fn adasyn(data: &Dataset, k: usize, rng: RngSeed) -> Result<Dataset> {
    adasyn_traced(data, k, rng).map(|(d, _)| d)
}
