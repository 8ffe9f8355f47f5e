use super::knn::NeighborIndex;
use crate::data::{Dataset, MAJORITY};
use crate::error::Result;

/// Opposite-label pairs `(a, b)`, `a < b`, that are each other's single
/// nearest neighbor (ties to the lower row index).
pub fn tomek_link_pairs(data: &Dataset) -> Vec<(usize, usize)> {
    if data.len() < 2 {
        return Vec::new();
    }
    let index = NeighborIndex::over(data);
    let nearest: Vec<usize> = (0..data.len())
        .map(|i| index.neighbors_of(i, 1).expect("two or more rows")[0])
        .collect();
    let labels = data.labels();
    (0..data.len())
        .filter_map(|a| {
            let b = nearest[a];
            (a < b && nearest[b] == a && labels[a] != labels[b]).then_some((a, b))
        })
        .collect()
}

/// Removes the majority member of every Tomek link. Minority rows are never
/// removed and the order of surviving rows is unchanged.
pub fn tomek_links(data: &Dataset) -> Result<Dataset> {
    data.require_both_classes()?;
    let mut drop = vec![false; data.len()];
    for (a, b) in tomek_link_pairs(data) {
        let maj = if data.labels()[a] == MAJORITY { a } else { b };
        drop[maj] = true;
    }
    let keep: Vec<usize> = (0..data.len()).filter(|&i| !drop[i]).collect();
    Ok(data.select(&keep))
}
