//! Adversarial oversampling for imbalanced tabular classification.
//!
//! Four generator frameworks (GAN, CGAN, WGAN, WCGAN) trained as minority
//! oversamplers, classical baselines (ROS, SMOTE, ADASYN), logistic and
//! boosted-tree classifiers, and the cross-validated experiment runners that
//! compare them.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod gan;
pub mod linalg;
pub mod models;
pub mod neural;
pub mod par;
pub mod resampling;
pub mod rng;
pub mod run;

pub use error::{Error, ErrorKind, Result};
