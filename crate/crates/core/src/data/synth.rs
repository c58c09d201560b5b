use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

use super::Dataset;

/// Recipe for a two-class Gaussian-mixture dataset.
///
/// Rows of each class are assigned to that class's mixture components in
/// round-robin order, so component counts are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_majority: usize,
    pub n_minority: usize,
    pub dim: usize,
    pub majority_means: Vec<Vec<f64>>,
    pub minority_means: Vec<Vec<f64>>,
    /// Isotropic standard deviation shared by every component.
    pub scale: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Majority centred at the origin; minority split between two
    /// components displaced by `shift` along the first axis and by `±shift`
    /// along the second.
    pub fn shifted(n_majority: usize, n_minority: usize, dim: usize, shift: f64, seed: u64) -> Self {
        let dim = dim.max(1);
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        a[0] = shift;
        b[0] = shift;
        if dim > 1 {
            a[1] = shift;
            b[1] = -shift;
        }
        Self {
            n_majority,
            n_minority,
            dim,
            majority_means: vec![vec![0.0; dim]],
            minority_means: vec![a, b],
            scale: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_majority == 0 || self.n_minority == 0 {
            return Err(Error::param("synthetic class counts must be at least 1"));
        }
        if self.dim == 0 || !(self.scale > 0.0) {
            return Err(Error::param("synthetic dim and scale must be positive"));
        }
        for m in self.majority_means.iter().chain(&self.minority_means) {
            if m.len() != self.dim {
                return Err(Error::param(format!(
                    "component mean has {} entries, expected {}",
                    m.len(),
                    self.dim
                )));
            }
        }
        if self.majority_means.is_empty() || self.minority_means.is_empty() {
            return Err(Error::param("each class needs at least one component"));
        }
        Ok(())
    }

    pub fn prevalence(&self) -> f64 {
        self.n_minority as f64 / (self.n_minority + self.n_majority) as f64
    }

    /// Mean of the minority mixture under round-robin assignment.
    pub fn class_mean(&self, label: u8) -> Vec<f64> {
        let (n, comps) = self.class(label);
        let mut mean = vec![0.0; self.dim];
        for i in 0..n {
            for (m, c) in mean.iter_mut().zip(&comps[i % comps.len()]) {
                *m += c / n as f64;
            }
        }
        mean
    }

    fn class(&self, label: u8) -> (usize, &[Vec<f64>]) {
        if label == 1 {
            (self.n_minority, &self.minority_means)
        } else {
            (self.n_majority, &self.majority_means)
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        let mut rng = rng::stream(self.seed);
        let mut rows: Vec<(Vec<f64>, u8)> = Vec::with_capacity(self.n_majority + self.n_minority);
        for label in [0u8, 1] {
            let (n, comps) = self.class(label);
            for i in 0..n {
                let mean = &comps[i % comps.len()];
                let row = mean
                    .iter()
                    .map(|m| m + self.scale * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                rows.push((row, label));
            }
        }
        rows.shuffle(&mut rng);
        let labels = rows.iter().map(|r| r.1).collect();
        let data = rows.into_iter().flat_map(|r| r.0).collect();
        let features = Matrix::new(self.n_majority + self.n_minority, self.dim, data)?;
        Dataset::unnamed(features, labels)
    }
}
