use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

/// `n_new` rows copied from uniformly drawn minority rows.
pub fn ros(minority: &Matrix, n_new: usize, seed: u64) -> Result<Matrix> {
    if minority.rows() == 0 {
        return Err(Error::data("random oversampling needs at least one minority row"));
    }
    let mut rng = rng::substream(seed, &[rng::tag("ros")]);
    let idx: Vec<usize> = (0..n_new).map(|_| rng.gen_range(0..minority.rows())).collect();
    Ok(minority.select_rows(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_requested() {
        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert_eq!(ros(&m, 0, 0).unwrap().rows(), 0);
    }

    #[test]
    fn single_row_is_copied() {
        let m = Matrix::from_rows(&[[1.5, -2.0]]).unwrap();
        let out = ros(&m, 5, 3).unwrap();
        assert_eq!(out.rows(), 5);
        assert!(out.iter_rows().all(|r| r == m.row(0)));
    }

    #[test]
    fn outputs_are_members() {
        let m = Matrix::from_fn(7, 3, |r, c| (r * 3 + c) as f64);
        let out = ros(&m, 50, 9).unwrap();
        assert!(out.iter_rows().all(|r| m.iter_rows().any(|s| s == r)));
    }

    #[test]
    fn empty_minority_rejected() {
        assert!(ros(&Matrix::zeros(0, 2), 3, 0).is_err());
    }
}
