use crate::linalg::Matrix;

/// Per-feature mean and standard deviation fitted on a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Features whose variance was zero; they pass through with σ = 1.
    pub constant: Vec<bool>,
}

/// Output of [`Scaler::fit_transform`].
#[derive(Debug, Clone)]
pub struct Standardized {
    pub data: Matrix,
    pub scaler: Scaler,
}

impl Scaler {
    pub fn identity(width: usize) -> Self {
        Self {
            means: vec![0.0; width],
            stds: vec![1.0; width],
            constant: vec![false; width],
        }
    }

    /// Population statistics of each column of `data`.
    pub fn fit(data: &Matrix) -> Self {
        let n = data.rows().max(1) as f64;
        let means = data.column_means();
        let mut vars = vec![0.0; data.cols()];
        for row in data.iter_rows() {
            for (v, (x, m)) in vars.iter_mut().zip(row.iter().zip(&means)) {
                *v += (x - m) * (x - m);
            }
        }
        let mut constant = vec![false; data.cols()];
        let stds = vars
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    constant[j] = true;
                    1.0
                }
            })
            .collect();
        Self { means, stds, constant }
    }

    pub fn fit_transform(data: &Matrix) -> Standardized {
        let scaler = Self::fit(data);
        Standardized {
            data: scaler.transform(data),
            scaler,
        }
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn has_constant(&self) -> bool {
        self.constant.iter().any(|&c| c)
    }

    pub fn transform(&self, data: &Matrix) -> Matrix {
        let mut out = data.clone();
        for r in 0..out.rows() {
            for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.means[j]) / self.stds[j];
            }
        }
        out
    }

    pub fn inverse(&self, data: &Matrix) -> Matrix {
        let mut out = data.clone();
        for r in 0..out.rows() {
            for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = *v * self.stds[j] + self.means[j];
            }
        }
        out
    }
}
