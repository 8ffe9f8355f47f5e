//! CART classification trees with Gini impurity.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::MINORITY;

pub const MAX_DEPTH: usize = 10;
pub const MIN_SPLIT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { score: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes in an arena; index 0 is the root. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
}

impl TreeModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { score } => return score,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    /// Sum over children of `2 · pos · neg / count` (Gini times count).
    impurity: f64,
}

struct Builder<'a> {
    x: &'a [f64],
    dim: usize,
    y: &'a [u8],
    /// Candidate features per split; `None` means all of them.
    max_features: Option<usize>,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
}

fn gini_mass(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    2.0 * pos as f64 * (total - pos) as f64 / total as f64
}

impl Builder<'_> {
    fn value(&self, row: usize, feature: usize) -> f64 {
        self.x[row * self.dim + feature]
    }

    fn candidates(&mut self) -> Vec<usize> {
        match (self.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < self.dim => {
                let mut f = sample(rng, self.dim, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.dim).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<SplitChoice> {
        let total_pos = rows.iter().filter(|&&r| self.y[r] == MINORITY).count();
        let n = rows.len();
        let mut best: Option<SplitChoice> = None;
        let mut order = rows.to_vec();
        for feature in self.candidates() {
            order.sort_by(|&a, &b| self.value(a, feature).total_cmp(&self.value(b, feature)).then(a.cmp(&b)));
            let mut left_pos = 0;
            for i in 0..n - 1 {
                if self.y[order[i]] == MINORITY {
                    left_pos += 1;
                }
                let (lo, hi) = (self.value(order[i], feature), self.value(order[i + 1], feature));
                if lo == hi {
                    continue;
                }
                let left_n = i + 1;
                let impurity = gini_mass(left_pos, left_n) + gini_mass(total_pos - left_pos, n - left_n);
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(SplitChoice { feature, threshold, impurity });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let pos = rows.iter().filter(|&&r| self.y[r] == MINORITY).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { score: pos as f64 / rows.len() as f64 });
        if depth >= MAX_DEPTH || rows.len() < MIN_SPLIT || pos == 0 || pos == rows.len() {
            return id;
        }
        let Some(split) = self.best_split(&rows) else { return id };
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.value(r, split.feature) <= split.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
        id
    }
}

/// Grows a tree on the given rows (duplicates allowed, as in a bootstrap).
/// With `max_features`, each split looks at that many features drawn from
/// `rng`.
pub fn fit_rows(
    x: &[f64],
    dim: usize,
    y: &[u8],
    rows: Vec<usize>,
    max_features: Option<usize>,
    rng: Option<&mut ChaCha8Rng>,
) -> TreeModel {
    let mut b = Builder { x, dim, y, max_features, rng, nodes: Vec::new() };
    b.grow(rows, 0);
    TreeModel { nodes: b.nodes }
}

pub fn fit(x: &[f64], dim: usize, y: &[u8]) -> TreeModel {
    fit_rows(x, dim, y, (0..y.len()).collect(), None, None)
}
