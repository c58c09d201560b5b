//! Logistic regression and gradient-boosted trees, plus the real-vs-fake
//! probe built on the latter.

mod boosted;
mod io;
mod logistic;
mod probe;

use std::fmt;
use std::str::FromStr;

pub use boosted::{fit_boosted, BoostConfig, BoostedTreesModel, Node, Tree};
pub use io::{read_classifier, write_classifier};
pub use logistic::{fit_logistic, LogisticConfig, LogisticModel};
pub use probe::{probe_accuracy, ProbeConfig};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classifier {
    Logistic,
    Boosted,
}

impl Classifier {
    pub fn name(self) -> &'static str {
        match self {
            Classifier::Logistic => "lr",
            Classifier::Boosted => "xgb",
        }
    }

    /// Fits with default hyperparameters.
    pub fn fit(self, train: &Dataset) -> Result<Fitted> {
        match self {
            Classifier::Logistic => fit_logistic(train, LogisticConfig::default()).map(Fitted::Logistic),
            Classifier::Boosted => fit_boosted(train, BoostConfig::default()).map(Fitted::Boosted),
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "logistic" => Ok(Classifier::Logistic),
            "xgb" | "boosted" => Ok(Classifier::Boosted),
            other => Err(Error::param(format!("unknown classifier {other:?} (expected lr or xgb)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Logistic(LogisticModel),
    Boosted(BoostedTreesModel),
}

impl Fitted {
    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>> {
        match self {
            Fitted::Logistic(m) => m.predict_proba(features),
            Fitted::Boosted(m) => m.predict_proba(features),
        }
    }
}
