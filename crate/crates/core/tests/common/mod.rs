//! Shared oracles for the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// The 24 `(array, word)` pairs of the `S_4` generation tree, in tree order.
/// Entry 11 is the evaluated array; the figure prints `[3,1,2,0]` there.
pub const S4_TREE: [([usize; 4], &str); 24] = [
    ([0, 1, 2, 3], "I"),
    ([0, 1, 3, 2], "s2"),
    ([0, 3, 1, 2], "s2 s1"),
    ([3, 0, 1, 2], "s2 s1 s0"),
    ([0, 2, 1, 3], "s1"),
    ([0, 2, 3, 1], "s1 s2"),
    ([0, 3, 2, 1], "s1 s2 s1"),
    ([3, 0, 2, 1], "s1 s2 s1 s0"),
    ([2, 0, 1, 3], "s1 s0"),
    ([2, 0, 3, 1], "s1 s0 s2"),
    ([2, 3, 0, 1], "s1 s0 s2 s1"),
    ([3, 2, 0, 1], "s1 s0 s2 s1 s0"),
    ([1, 0, 2, 3], "s0"),
    ([1, 0, 3, 2], "s0 s2"),
    ([1, 3, 0, 2], "s0 s2 s1"),
    ([3, 1, 0, 2], "s0 s2 s1 s0"),
    ([1, 2, 0, 3], "s0 s1"),
    ([1, 2, 3, 0], "s0 s1 s2"),
    ([1, 3, 2, 0], "s0 s1 s2 s1"),
    ([3, 1, 2, 0], "s0 s1 s2 s1 s0"),
    ([2, 1, 0, 3], "s0 s1 s0"),
    ([2, 1, 3, 0], "s0 s1 s0 s2"),
    ([2, 3, 1, 0], "s0 s1 s0 s2 s1"),
    ([3, 2, 1, 0], "s0 s1 s0 s2 s1 s0"),
];

/// Vertex labels of the `N = 3` graph in construction order.
pub const S3_GRAPH_LABELS: [&str; 6] = ["I", "s0", "s1", "s1 s0", "s0 s1", "s0 s1 s0"];

/// Vertex labels drawn for the `N = 4` graph (as a set).
pub const S4_GRAPH_LABELS: [&str; 24] = [
    "I",
    "s0",
    "s1",
    "s1 s0",
    "s0 s1",
    "s0 s1 s0",
    "s2",
    "s2 s1",
    "s2 s1 s0",
    "s0 s2 s1 s0",
    "s0 s2 s1",
    "s0 s2",
    "s0 s1 s2",
    "s0 s1 s2 s1",
    "s0 s1 s2 s1 s0",
    "s0 s1 s0 s2",
    "s0 s1 s0 s2 s1",
    "s0 s1 s0 s2 s1 s0",
    "s1 s0 s2",
    "s1 s0 s2 s1",
    "s1 s0 s2 s1 s0",
    "s1 s2",
    "s1 s2 s1",
    "s1 s2 s1 s0",
];

/// Pearson statistic of `counts` against `probs`.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Upper critical value at significance `alpha`.
pub fn chi_square_critical(dof: u64, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Statistic of `draws` over the cells `cells`, assumed equiprobable. Draws
/// outside the cells are returned separately.
pub fn uniform_chi_square<T: Eq + Hash + Clone>(cells: &[T], draws: impl IntoIterator<Item = T>) -> (f64, u64) {
    let index: HashMap<T, usize> = cells.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let mut counts = vec![0u64; cells.len()];
    let mut stray = 0;
    for d in draws {
        match index.get(&d) {
            Some(&i) => counts[i] += 1,
            None => stray += 1,
        }
    }
    let probs = vec![1.0 / cells.len() as f64; cells.len()];
    (chi_square(&counts, &probs), stray)
}

/// Mean of `values` at `indices`.
pub fn mean_at(values: &[f64], indices: &[usize]) -> f64 {
    indices.iter().map(|&i| values[i]).sum::<f64>() / indices.len() as f64
}
