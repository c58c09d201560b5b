use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::Scaler;

/// Feature matrix with binary labels. Label `1` is the minority (fraud) class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub columns: Vec<String>,
    pub scaler: Option<Scaler>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, columns: Vec<String>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::data(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if columns.len() != features.cols() {
            return Err(Error::data(format!(
                "{} column names for {} features",
                columns.len(),
                features.cols()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::data(format!("label {bad} is not binary")));
        }
        Ok(Self {
            features,
            labels,
            columns,
            scaler: None,
        })
    }

    /// Dataset with generated column names `V1..Vd`.
    pub fn unnamed(features: Matrix, labels: Vec<u8>) -> Result<Self> {
        let columns = (1..=features.cols()).map(|i| format!("V{i}")).collect();
        Self::new(features, labels, columns)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn indices_of(&self, label: u8) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn class_rows(&self, label: u8) -> Matrix {
        self.features.select_rows(&self.indices_of(label))
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            columns: self.columns.clone(),
            scaler: self.scaler.clone(),
        }
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.count(0) == 0 || self.count(1) == 0 {
            return Err(Error::data(format!(
                "both classes required, got {} negatives and {} positives",
                self.count(0),
                self.count(1)
            )));
        }
        Ok(())
    }

    /// Appends rows that all share `label`.
    pub fn append(&mut self, rows: &Matrix, label: u8) -> Result<()> {
        if rows.rows() == 0 {
            return Ok(());
        }
        self.features = Matrix::vstack(&[&self.features, rows])?;
        self.labels.extend(std::iter::repeat_n(label, rows.rows()));
        Ok(())
    }
}
