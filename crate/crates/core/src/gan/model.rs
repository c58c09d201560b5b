use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tape};
use crate::neural::{Mlp, MlpSpec, Mode, OutputActivation};
use crate::rng;

use super::losses;
use super::{Framework, GanConfig};

/// `count × dim` matrix of i.i.d. standard normal draws.
pub fn sample_noise<R: Rng>(count: usize, dim: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(count, dim, |_, _| rng.sample(StandardNormal))
}

/// One-hot encoding of class indices.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Matrix> {
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::param(format!("condition {bad} out of range for {classes} classes")));
    }
    Ok(Matrix::from_fn(labels.len(), classes, |r, c| if labels[r] == c { 1.0 } else { 0.0 }))
}

/// Generator/discriminator pair plus what is needed to map generated rows
/// back to the original feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub config: GanConfig,
    pub feature_dim: usize,
    pub generator: Mlp,
    pub discriminator: Mlp,
    /// Standardization fitted on the training rows; `None` until trained.
    pub scaler: Option<Scaler>,
    /// Training rows per condition class (conditional frameworks).
    pub condition_counts: Vec<usize>,
}

impl GanModel {
    pub fn new(config: GanConfig, feature_dim: usize) -> Result<Self> {
        config.validate()?;
        if feature_dim == 0 {
            return Err(Error::param("feature dimension must be positive"));
        }
        let generator = Mlp::new(
            Self::generator_spec(&config, feature_dim)?,
            rng::derive(config.seed, &[rng::tag("generator")]),
        );
        let discriminator = Mlp::new(
            Self::discriminator_spec(&config, feature_dim)?,
            rng::derive(config.seed, &[rng::tag("discriminator")]),
        );
        Ok(Self {
            config,
            feature_dim,
            generator,
            discriminator,
            scaler: None,
            condition_counts: Vec::new(),
        })
    }

    fn condition_width(config: &GanConfig) -> usize {
        if config.framework.is_conditional() {
            config.condition_classes
        } else {
            0
        }
    }

    pub fn generator_spec(config: &GanConfig, feature_dim: usize) -> Result<MlpSpec> {
        let mut sizes = vec![config.noise_dim + Self::condition_width(config)];
        sizes.extend(std::iter::repeat_n(config.hidden_nodes, config.hidden_layers));
        sizes.push(feature_dim);
        MlpSpec::new(sizes, config.alpha, OutputActivation::Linear, 0.0)
    }

    pub fn discriminator_spec(config: &GanConfig, feature_dim: usize) -> Result<MlpSpec> {
        let mut sizes = vec![feature_dim + Self::condition_width(config)];
        sizes.extend(std::iter::repeat_n(config.hidden_nodes, config.hidden_layers));
        sizes.push(1);
        let output = if config.framework.is_wasserstein() {
            OutputActivation::Linear
        } else {
            OutputActivation::Sigmoid
        };
        MlpSpec::new(sizes, config.alpha, output, config.dropout)
    }

    pub fn framework(&self) -> Framework {
        self.config.framework
    }

    pub fn is_conditional(&self) -> bool {
        self.config.framework.is_conditional()
    }

    fn check_condition(&self, condition: Option<usize>) -> Result<()> {
        match (self.is_conditional(), condition) {
            (true, None) => Err(Error::param(format!("{} generation needs a condition class", self.framework()))),
            (false, Some(_)) => Err(Error::param(format!("{} does not take a condition", self.framework()))),
            (true, Some(c)) if c >= self.config.condition_classes => Err(Error::param(format!(
                "condition {c} out of range for {} classes",
                self.config.condition_classes
            ))),
            _ => Ok(()),
        }
    }

    /// Generator output in the standardized space the networks train in.
    pub(crate) fn generate_scaled(&self, noise: &Matrix, conditions: Option<&Matrix>) -> Result<Matrix> {
        let input = match conditions {
            Some(c) => noise.hstack(c)?,
            None => noise.clone(),
        };
        self.generator.forward(&input, Mode::Eval, 0)
    }

    /// `count` rows in the original feature space. Deterministic per `seed`.
    pub fn generate(&self, count: usize, condition: Option<usize>, seed: u64) -> Result<Matrix> {
        self.check_condition(condition)?;
        if count == 0 {
            return Ok(Matrix::zeros(0, self.feature_dim));
        }
        let mut rng = rng::substream(seed, &[rng::tag("generate")]);
        let noise = sample_noise(count, self.config.noise_dim, &mut rng);
        let cond = match condition {
            Some(c) => Some(one_hot(&vec![c; count], self.config.condition_classes)?),
            None => None,
        };
        let out = self.generate_scaled(&noise, cond.as_ref())?;
        Ok(match &self.scaler {
            Some(s) => s.inverse(&out),
            None => out,
        })
    }

    /// Generates `count` rows, spreading conditional draws over classes in
    /// proportion to the training class sizes (largest remainder).
    pub fn generate_mixed(&self, count: usize, seed: u64) -> Result<Matrix> {
        if !self.is_conditional() {
            return self.generate(count, None, seed);
        }
        let classes = self.config.condition_classes;
        let weights: Vec<f64> = if self.condition_counts.len() == classes && self.condition_counts.iter().any(|&c| c > 0) {
            self.condition_counts.iter().map(|&c| c as f64).collect()
        } else {
            vec![1.0; classes]
        };
        let alloc = crate::resampling::largest_remainder(&weights, count);
        let mut parts = Vec::with_capacity(classes);
        for (class, &n) in alloc.iter().enumerate() {
            parts.push(self.generate(n, Some(class), rng::derive(seed, &[class as u64]))?);
        }
        let refs: Vec<&Matrix> = parts.iter().collect();
        let mut out = Matrix::vstack(&refs)?;
        if out.cols() == 0 {
            out = Matrix::zeros(0, self.feature_dim);
        }
        Ok(out)
    }

    /// Eval-mode `(J_D, J_G)` for one batch of standardized real rows, their
    /// one-hot conditions (conditional frameworks) and generator noise.
    /// The generator is fed the same conditions as the real rows.
    pub fn losses(&self, real: &Matrix, conditions: Option<&Matrix>, noise: &Matrix) -> Result<(f64, f64)> {
        if self.is_conditional() != conditions.is_some() {
            return Err(Error::param("conditions must be given exactly for conditional frameworks"));
        }
        if let Some(c) = conditions {
            if c.cols() != self.config.condition_classes || c.rows() != real.rows() {
                return Err(Error::Shape {
                    op: "condition labels",
                    left: c.shape(),
                    right: (real.rows(), self.config.condition_classes),
                });
            }
        }
        let fake = self.generate_scaled(noise, conditions)?;
        let (real_in, fake_in) = match conditions {
            Some(c) => (real.hstack(c)?, fake.hstack(c)?),
            None => (real.clone(), fake),
        };
        let mut tape = Tape::new();
        let vars = self.discriminator.params.bind(&mut tape);
        let mut rng = rng::stream(0);
        let r = tape.leaf(real_in);
        let f = tape.leaf(fake_in);
        let spec = &self.discriminator.spec;
        let d_real = vars.forward(&mut tape, spec, r, Mode::Eval, &mut rng)?;
        let d_fake = vars.forward(&mut tape, spec, f, Mode::Eval, &mut rng)?;
        let (jd, jg) = match self.framework() {
            Framework::Gan => (
                losses::d_loss_gan(&mut tape, d_real, d_fake)?,
                losses::g_loss_nonsaturating(&mut tape, d_fake)?,
            ),
            Framework::Cgan => (
                losses::cgan_d_loss(&mut tape, d_real, d_fake)?,
                losses::cgan_g_loss(&mut tape, d_fake)?,
            ),
            Framework::Wgan | Framework::Wcgan => (
                losses::wgan_critic_loss(&mut tape, d_real, d_fake)?,
                losses::wgan_g_loss(&mut tape, d_fake),
            ),
        };
        Ok((tape.scalar(jd), tape.scalar(jg)))
    }
}
