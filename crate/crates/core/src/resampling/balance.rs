use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, Scaler};
use crate::error::{Error, Result};
use crate::gan::{Framework, GanModel};
use crate::rng;

use super::{adasyn, ros, smote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    None,
    Ros,
    Smote,
    Adasyn,
    Gan,
    Cgan,
    Wgan,
    Wcgan,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::None,
        Method::Ros,
        Method::Smote,
        Method::Adasyn,
        Method::Gan,
        Method::Cgan,
        Method::Wgan,
        Method::Wcgan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Ros => "ros",
            Method::Smote => "smote",
            Method::Adasyn => "adasyn",
            Method::Gan => "gan",
            Method::Cgan => "cgan",
            Method::Wgan => "wgan",
            Method::Wcgan => "wcgan",
        }
    }

    /// The adversarial framework behind a generator-based method.
    pub fn framework(self) -> Option<Framework> {
        match self {
            Method::Gan => Some(Framework::Gan),
            Method::Cgan => Some(Framework::Cgan),
            Method::Wgan => Some(Framework::Wgan),
            Method::Wcgan => Some(Framework::Wcgan),
            _ => None,
        }
    }
}

impl From<Framework> for Method {
    fn from(f: Framework) -> Self {
        match f {
            Framework::Gan => Method::Gan,
            Framework::Cgan => Method::Cgan,
            Framework::Wgan => Method::Wgan,
            Framework::Wcgan => Method::Wcgan,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::param(format!("unknown balancing method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BalancePlan<'a> {
    pub method: Method,
    pub seed: u64,
    pub smote_k: usize,
    pub adasyn_k: usize,
    /// Fraction of the class gap ADASYN fills; 1 equalizes the classes.
    pub adasyn_beta: f64,
    pub gan: Option<&'a GanModel>,
    /// Maps generator output (original feature space) into the space of the
    /// dataset being balanced.
    pub gan_transform: Option<&'a Scaler>,
}

impl<'a> BalancePlan<'a> {
    pub fn new(method: Method, seed: u64) -> Self {
        Self {
            method,
            seed,
            smote_k: 5,
            adasyn_k: 5,
            adasyn_beta: 1.0,
            gan: None,
            gan_transform: None,
        }
    }

    pub fn with_gan(mut self, model: &'a GanModel, transform: Option<&'a Scaler>) -> Self {
        self.gan = Some(model);
        self.gan_transform = transform;
        self
    }
}

/// A balanced dataset plus a per-row flag marking synthetic rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub dataset: Dataset,
    pub synthetic: Vec<bool>,
}

impl Augmented {
    pub fn n_synthetic(&self) -> usize {
        self.synthetic.iter().filter(|&&s| s).count()
    }

    /// The dataset without the provenance flags.
    pub fn strip(self) -> Dataset {
        self.dataset
    }
}

/// Oversamples the smaller class of `dataset` up to the size of the larger.
/// Original rows keep their order and come first.
pub fn balance(dataset: &Dataset, plan: &BalancePlan) -> Result<Augmented> {
    let unchanged = || Augmented {
        dataset: dataset.clone(),
        synthetic: vec![false; dataset.len()],
    };
    if plan.method == Method::None {
        return Ok(unchanged());
    }
    dataset.require_both_classes()?;
    let (n0, n1) = (dataset.count(0), dataset.count(1));
    if n0 == n1 {
        return Ok(unchanged());
    }
    let minority_label = if n1 < n0 { 1 } else { 0 };
    let gap = n0.abs_diff(n1);
    let minority = dataset.class_rows(minority_label);
    let seed = rng::derive(plan.seed, &[rng::tag(plan.method.name())]);
    let rows = match plan.method {
        Method::None => unreachable!(),
        Method::Ros => ros(&minority, gap, seed)?,
        Method::Smote => smote(&minority, gap, plan.smote_k, seed)?,
        Method::Adasyn => {
            if !(plan.adasyn_beta >= 0.0 && plan.adasyn_beta <= 1.0) {
                return Err(Error::param(format!("ADASYN beta {} outside [0, 1]", plan.adasyn_beta)));
            }
            let n_new = (plan.adasyn_beta * gap as f64).round() as usize;
            let majority = dataset.class_rows(1 - minority_label);
            adasyn(&minority, &majority, n_new, plan.adasyn_k, seed)?
        }
        gan_method => {
            let model = plan
                .gan
                .ok_or_else(|| Error::param(format!("{gan_method} balancing needs a trained generator")))?;
            if Some(model.framework()) != gan_method.framework() {
                return Err(Error::param(format!(
                    "{gan_method} balancing was given a {} model",
                    model.framework()
                )));
            }
            if model.feature_dim != dataset.n_features() {
                return Err(Error::param(format!(
                    "generator produces {} features, dataset has {}",
                    model.feature_dim,
                    dataset.n_features()
                )));
            }
            let raw = model.generate_mixed(gap, seed)?;
            match plan.gan_transform {
                Some(s) => s.transform(&raw),
                None => raw,
            }
        }
    };
    let mut out = dataset.clone();
    out.append(&rows, minority_label)?;
    let mut synthetic = vec![false; dataset.len()];
    synthetic.resize(out.len(), true);
    Ok(Augmented { dataset: out, synthetic })
}
