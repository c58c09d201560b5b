use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{sigmoid, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub tolerance: f64,
    /// Strength of the `l2/2·‖w‖²` penalty; the bias is not penalized.
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 5000,
            tolerance: 1e-6,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LogisticConfig,
    pub epochs: usize,
}

pub(crate) fn check_width(expected: usize, features: &Matrix) -> Result<()> {
    if features.cols() != expected {
        return Err(Error::Shape {
            op: "predict_proba",
            left: (features.rows(), expected),
            right: features.shape(),
        });
    }
    Ok(())
}

impl LogisticModel {
    pub fn zeros(width: usize) -> Self {
        Self {
            weights: vec![0.0; width],
            bias: 0.0,
            config: LogisticConfig::default(),
            epochs: 0,
        }
    }

    fn margins(&self, features: &Matrix) -> Vec<f64> {
        features
            .iter_rows()
            .map(|r| self.bias + r.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
            .collect()
    }

    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>> {
        check_width(self.weights.len(), features)?;
        Ok(self.margins(features).into_iter().map(sigmoid).collect())
    }

    /// Gradient of the penalized mean log-loss: weights first, bias last.
    pub fn gradient(&self, features: &Matrix, labels: &[u8]) -> Result<Vec<f64>> {
        check_width(self.weights.len(), features)?;
        let d = self.weights.len();
        let mut grad = vec![0.0; d + 1];
        for (row, &y) in features.iter_rows().zip(labels) {
            let z = self.bias + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>();
            let r = sigmoid(z) - y as f64;
            grad[..d].iter_mut().zip(row).for_each(|(g, x)| *g += r * x);
            grad[d] += r;
        }
        let n = labels.len() as f64;
        for (g, w) in grad[..d].iter_mut().zip(&self.weights) {
            *g = *g / n + self.config.l2 * w;
        }
        grad[d] /= n;
        Ok(grad)
    }

    /// Penalized mean log-loss.
    pub fn loss(&self, features: &Matrix, labels: &[u8]) -> Result<f64> {
        check_width(self.weights.len(), features)?;
        let data: f64 = self
            .margins(features)
            .iter()
            .zip(labels)
            .map(|(&z, &y)| softplus(z) - y as f64 * z)
            .sum::<f64>()
            / labels.len() as f64;
        Ok(data + 0.5 * self.config.l2 * self.weights.iter().map(|w| w * w).sum::<f64>())
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Full-batch gradient descent on the penalized log-loss, starting from zero.
pub fn fit_logistic(train: &Dataset, config: LogisticConfig) -> Result<LogisticModel> {
    train.require_both_classes()?;
    if !(config.learning_rate > 0.0) || !(config.l2 >= 0.0) {
        return Err(Error::param("logistic regression needs learning_rate > 0 and l2 >= 0"));
    }
    let mut model = LogisticModel {
        config,
        ..LogisticModel::zeros(train.n_features())
    };
    for epoch in 0..config.max_epochs {
        let grad = model.gradient(&train.features, &train.labels)?;
        if grad.iter().map(|g| g * g).sum::<f64>().sqrt() < config.tolerance {
            model.epochs = epoch;
            return Ok(model);
        }
        let (gb, gw) = grad.split_last().unwrap();
        model.weights.iter_mut().zip(gw).for_each(|(w, g)| *w -= config.learning_rate * g);
        model.bias -= config.learning_rate * gb;
        model.epochs = epoch + 1;
    }
    if !model.weights.iter().chain([&model.bias]).all(|v| v.is_finite()) {
        return Err(Error::Divergence {
            iteration: model.epochs,
            detail: "logistic regression parameters are not finite".into(),
        });
    }
    Ok(model)
}
