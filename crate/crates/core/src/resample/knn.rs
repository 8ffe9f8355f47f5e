use crate::data::Dataset;
use crate::error::{invalid, Result};

/// Exact Euclidean nearest neighbors by brute force.
///
/// Ties are broken toward the lower reference row index.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a> {
    points: &'a [f64],
    dim: usize,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && points.len() % dim == 0, "row-major matrix expected");
        Self { points, dim }
    }

    pub fn over(data: &'a Dataset) -> Self {
        Self::new(data.features(), data.dim())
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn ranked(&self, point: &[f64], exclude: Option<usize>, k: usize) -> Result<Vec<usize>> {
        let available = self.len() - usize::from(exclude.is_some());
        if k == 0 || k > available {
            return Err(invalid(format!("asked for {k} neighbors, {available} available")));
        }
        let mut cand: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| Some(i) != exclude)
            .map(|i| (sq_dist(point, self.row(i)), i))
            .collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, by_key);
            cand.truncate(k);
        }
        cand.sort_unstable_by(by_key);
        Ok(cand.into_iter().map(|(_, i)| i).collect())
    }

    /// `k` nearest reference rows to `point`. When `point` is itself a
    /// reference row (the lowest-indexed row with identical values), that row
    /// is left out.
    pub fn query(&self, point: &[f64], k: usize) -> Result<Vec<usize>> {
        let own = (0..self.len()).find(|&i| self.row(i) == point);
        self.ranked(point, own, k)
    }

    /// `k` nearest neighbors of reference row `i`, excluding `i`.
    pub fn neighbors_of(&self, i: usize, k: usize) -> Result<Vec<usize>> {
        self.ranked(self.row(i), Some(i), k)
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn query_knn(index: &NeighborIndex<'_>, point: &[f64], k: usize) -> Result<Vec<usize>> {
    index.query(point, k)
}
