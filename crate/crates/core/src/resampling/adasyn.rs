use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::{par, rng};

use super::{interpolate, largest_remainder, nearest, neighbor_table, smote};

/// Density-driven split of `n_new` synthetic rows over minority rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AdasynAllocation {
    /// Share of majority rows among each minority row's `k` nearest
    /// neighbours in the combined data.
    pub ratios: Vec<f64>,
    /// Synthetic rows assigned to each minority row; sums to `n_new`.
    pub counts: Vec<usize>,
}

/// Returns `None` when no minority row has a majority neighbour.
pub fn adasyn_allocation(minority: &Matrix, majority: &Matrix, n_new: usize, k: usize) -> Result<Option<AdasynAllocation>> {
    if k == 0 {
        return Err(Error::param("ADASYN needs k >= 1"));
    }
    if minority.rows() == 0 {
        return Err(Error::data("ADASYN needs minority rows"));
    }
    let combined = Matrix::vstack(&[minority, majority])?;
    let n_min = minority.rows();
    let ratios: Vec<f64> = par::map_range(n_min, |i| {
        let nn = nearest(&combined, minority.row(i), k, Some(i));
        nn.iter().filter(|&&j| j >= n_min).count() as f64 / k as f64
    });
    if ratios.iter().all(|&r| r == 0.0) {
        return Ok(None);
    }
    let counts = largest_remainder(&ratios, n_new);
    Ok(Some(AdasynAllocation { ratios, counts }))
}

/// Adaptive synthetic sampling: minority rows surrounded by more majority
/// rows receive more synthetic neighbours. Falls back to SMOTE when every
/// minority row is surrounded by minority rows only.
pub fn adasyn(minority: &Matrix, majority: &Matrix, n_new: usize, k: usize, seed: u64) -> Result<Matrix> {
    if minority.rows() < 2 {
        return Err(Error::param("ADASYN needs at least two minority rows"));
    }
    let Some(alloc) = adasyn_allocation(minority, majority, n_new, k)? else {
        log::warn!("ADASYN: no minority row has majority neighbours, falling back to SMOTE");
        return smote(minority, n_new, k.min(minority.rows() - 1), seed);
    };
    let k_min = k.min(minority.rows() - 1);
    let neighbors = neighbor_table(minority, k_min);
    let mut rng = rng::substream(seed, &[rng::tag("adasyn")]);
    let mut out = Matrix::zeros(0, minority.cols());
    for (i, &count) in alloc.counts.iter().enumerate() {
        for _ in 0..count {
            let nn = neighbors[i][rng.gen_range(0..k_min)];
            let u: f64 = rng.gen();
            out.push_row(&interpolate(minority.row(i), minority.row(nn), u))?;
        }
    }
    Ok(out)
}
