use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

use super::{interpolate, neighbor_table};

/// Synthetic rows on segments between a minority row and one of its `k`
/// nearest minority neighbours.
pub fn smote(minority: &Matrix, n_new: usize, k: usize, seed: u64) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::param("SMOTE needs k >= 1"));
    }
    if minority.rows() <= k {
        return Err(Error::param(format!(
            "SMOTE with k={k} needs more than {k} minority rows, got {}; use k <= {}",
            minority.rows(),
            minority.rows().saturating_sub(1)
        )));
    }
    if n_new == 0 {
        return Ok(Matrix::zeros(0, minority.cols()));
    }
    let neighbors = neighbor_table(minority, k);
    let mut rng = rng::substream(seed, &[rng::tag("smote")]);
    let mut out = Matrix::zeros(0, minority.cols());
    for _ in 0..n_new {
        let base = rng.gen_range(0..minority.rows());
        let nn = neighbors[base][rng.gen_range(0..k)];
        let u: f64 = rng.gen();
        out.push_row(&interpolate(minority.row(base), minority.row(nn), u))?;
    }
    Ok(out)
}
