use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Framework {
    Gan,
    Cgan,
    Wgan,
    Wcgan,
}

impl Framework {
    pub const ALL: [Framework; 4] = [Framework::Gan, Framework::Cgan, Framework::Wgan, Framework::Wcgan];

    pub fn name(self) -> &'static str {
        match self {
            Framework::Gan => "gan",
            Framework::Cgan => "cgan",
            Framework::Wgan => "wgan",
            Framework::Wcgan => "wcgan",
        }
    }

    pub fn is_conditional(self) -> bool {
        matches!(self, Framework::Cgan | Framework::Wcgan)
    }

    /// Critic with linear output, weight clipping and the earth-mover losses.
    pub fn is_wasserstein(self) -> bool {
        matches!(self, Framework::Wgan | Framework::Wcgan)
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gan" => Ok(Framework::Gan),
            "cgan" => Ok(Framework::Cgan),
            "wgan" => Ok(Framework::Wgan),
            "wcgan" => Ok(Framework::Wcgan),
            other => Err(Error::param(format!("unknown framework {other:?}"))),
        }
    }
}

/// Hyperparameters of one adversarial training run.
#[derive(Debug, Clone, PartialEq)]
pub struct GanConfig {
    pub framework: Framework,
    pub learning_rate: f64,
    /// Dropout on the discriminator's hidden layers.
    pub dropout: f64,
    pub hidden_nodes: usize,
    pub hidden_layers: usize,
    pub noise_dim: usize,
    pub batch_size: usize,
    /// Discriminator updates per generator update.
    pub d_steps: usize,
    /// Critic weight bound (Wasserstein family only).
    pub clip_value: f64,
    /// One-hot width of the condition block (conditional family only).
    pub condition_classes: usize,
    pub max_iterations: usize,
    /// Probe cadence in generator iterations; 0 disables probing.
    pub probe_every: usize,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl GanConfig {
    /// Tuned learning rate, dropout and width for each framework, with
    /// shared architecture defaults.
    pub fn preset(framework: Framework) -> Self {
        let (learning_rate, dropout, hidden_nodes) = match framework {
            Framework::Gan => (0.029, 0.5, 85),
            Framework::Cgan => (0.036, 0.4, 46),
            Framework::Wgan => (0.011, 0.5, 63),
            Framework::Wcgan => (0.022, 0.22, 5),
        };
        let (d_steps, beta1, beta2) = if framework.is_wasserstein() {
            (5, 0.5, 0.9)
        } else {
            (1, 0.9, 0.999)
        };
        Self {
            framework,
            learning_rate,
            dropout,
            hidden_nodes,
            hidden_layers: 3,
            noise_dim: 100,
            batch_size: 64,
            d_steps,
            clip_value: 0.01,
            condition_classes: 2,
            max_iterations: 5000,
            probe_every: 100,
            alpha: 0.2,
            beta1,
            beta2,
            epsilon: 1e-8,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::param(msg));
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if self.d_steps == 0 {
            return fail("discriminator steps per iteration must be at least 1".into());
        }
        if self.hidden_nodes == 0 || self.hidden_layers == 0 || self.noise_dim == 0 {
            return fail("hidden width, hidden layer count and noise dim must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if self.framework.is_wasserstein() && !(self.clip_value > 0.0) {
            return fail(format!("clip value must be positive, got {}", self.clip_value));
        }
        if self.framework.is_conditional() && self.condition_classes < 2 {
            return fail(format!(
                "conditional frameworks need at least 2 condition classes, got {}",
                self.condition_classes
            ));
        }
        if !(self.alpha > 0.0) {
            return fail(format!("leaky-relu slope must be positive, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("Adam betas must lie in [0, 1)".into());
        }
        Ok(())
    }

    /// `key=value` pairs in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("framework", self.framework.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("dropout", self.dropout.to_string()),
            ("hidden_nodes", self.hidden_nodes.to_string()),
            ("hidden_layers", self.hidden_layers.to_string()),
            ("noise_dim", self.noise_dim.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("d_steps", self.d_steps.to_string()),
            ("clip_value", self.clip_value.to_string()),
            ("condition_classes", self.condition_classes.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("probe_every", self.probe_every.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Applies one `key=value` override. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::param(format!("bad value {value:?} for {key}")))
        }
        match key {
            "framework" => self.framework = value.parse()?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "dropout" => self.dropout = num(key, value)?,
            "hidden_nodes" => self.hidden_nodes = num(key, value)?,
            "hidden_layers" => self.hidden_layers = num(key, value)?,
            "noise_dim" => self.noise_dim = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "d_steps" => self.d_steps = num(key, value)?,
            "clip_value" => self.clip_value = num(key, value)?,
            "condition_classes" => self.condition_classes = num(key, value)?,
            "max_iterations" => self.max_iterations = num(key, value)?,
            "probe_every" => self.probe_every = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "beta1" => self.beta1 = num(key, value)?,
            "beta2" => self.beta2 = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::param(format!("unknown GAN setting {other:?}"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_tuned_values() {
        let rows: Vec<_> = Framework::ALL
            .iter()
            .map(|&f| {
                let c = GanConfig::preset(f);
                (c.learning_rate, c.dropout, c.hidden_nodes)
            })
            .collect();
        assert_eq!(
            rows,
            vec![(0.029, 0.5, 85), (0.036, 0.4, 46), (0.011, 0.5, 63), (0.022, 0.22, 5)]
        );
        for f in Framework::ALL {
            let c = GanConfig::preset(f);
            assert_eq!(c.batch_size, 64);
            assert_eq!(c.alpha, 0.2);
            assert_eq!(c.d_steps, if f.is_wasserstein() { 5 } else { 1 });
            c.validate().unwrap();
        }
    }

    #[test]
    fn invariants_enforced() {
        let mut c = GanConfig::preset(Framework::Wgan);
        c.clip_value = 0.0;
        assert!(c.validate().is_err());
        let mut c = GanConfig::preset(Framework::Cgan);
        c.condition_classes = 1;
        assert!(c.validate().is_err());
        let mut c = GanConfig::preset(Framework::Gan);
        c.d_steps = 0;
        assert!(c.validate().is_err());
        c.d_steps = 1;
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn pairs_roundtrip() {
        let mut c = GanConfig::preset(Framework::Wcgan);
        c.seed = 77;
        c.learning_rate = 0.1 + 0.2;
        let mut back = GanConfig::preset(Framework::Gan);
        for (k, v) in c.to_pairs() {
            back.set(k, &v).unwrap();
        }
        assert_eq!(back, c);
        assert!(back.set("nodes", "3").is_err());
    }
}
