//! Minority oversampling: random duplication, SMOTE, ADASYN, generator
//! draws, plus the k-means labeler used to condition the conditional
//! frameworks.

mod adasyn;
mod balance;
mod kmeans;
mod ros;
mod smote;

pub use adasyn::{adasyn, adasyn_allocation, AdasynAllocation};
pub use balance::{balance, Augmented, BalancePlan, Method};
pub use kmeans::{kmeans, ConditionLabels};
pub use ros::ros;
pub use smote::smote;

use crate::linalg::{squared_distance, Matrix};
use crate::par;

/// Splits `total` into integer shares proportional to `weights`.
///
/// Floors first, then hands the leftover units to the largest fractional
/// parts (lower index wins ties). Shares always sum to `total`.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut shares: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = shares.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        shares[i] += 1;
    }
    shares
}

/// Indices of the `k` rows of `points` nearest to `query`, skipping
/// `exclude`. Ties break by lower index.
pub(crate) fn nearest(points: &Matrix, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&i| Some(i) != exclude)
        .map(|i| (squared_distance(points.row(i), query), i))
        .collect();
    let k = k.min(d.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    d.select_nth_unstable_by(k - 1, cmp);
    d.truncate(k);
    d.sort_by(cmp);
    d.into_iter().map(|p| p.1).collect()
}

/// k nearest other rows for every row of `points`.
pub(crate) fn neighbor_table(points: &Matrix, k: usize) -> Vec<Vec<usize>> {
    par::map_range(points.rows(), |i| nearest(points, points.row(i), k, Some(i)))
}

/// `x + u·(y − x)`.
pub(crate) fn interpolate(x: &[f64], y: &[f64], u: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + u * (b - a)).collect()
}
