use std::io::Write;

use rand::seq::index;
use rand::Rng;

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tape};
use crate::neural::{AdamConfig, AdamState, MlpParams, Mode};
use crate::rng::{self, Stream};

use super::losses::{self, clip_weights_in_place};
use super::model::{one_hot, sample_noise, GanModel};
use super::Framework;

/// Scores a model snapshot; lower is better (ideal probe accuracy is 0.5).
pub type ProbeFn<'a> = dyn FnMut(usize, &GanModel) -> Result<f64> + 'a;

/// Instrumentation hooks fired during training.
pub trait TrainObserver {
    fn discriminator_updated(&mut self, _iteration: usize, _params: &MlpParams) {}
    fn generator_updated(&mut self, _iteration: usize, _model: &GanModel) {}
}

struct NoObserver;
impl TrainObserver for NoObserver {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRecord {
    /// 1-based generator iteration.
    pub iteration: usize,
    pub j_d: f64,
    pub j_g: f64,
    pub probe_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<TrainRecord>,
    pub d_updates: usize,
    pub g_updates: usize,
}

impl TrainLog {
    pub fn probes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.records
            .iter()
            .filter_map(|r| r.probe_accuracy.map(|p| (r.iteration, p)))
    }

    /// Iteration with the lowest probe accuracy; ties go to the earliest.
    pub fn select_stop_iteration(&self) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (it, acc) in self.probes() {
            if best.is_none_or(|(_, b)| acc < b) {
                best = Some((it, acc));
            }
        }
        best.map(|b| b.0)
            .ok_or_else(|| Error::Contract("training log has no probe records".into()))
    }

    /// Writes `iteration,j_d,j_g,probe_accuracy`, leaving the probe field
    /// empty where no probe ran.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "iteration,j_d,j_g,probe_accuracy")?;
        for r in &self.records {
            let probe = r.probe_accuracy.map(|p| p.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", r.iteration, r.j_d, r.j_g, probe)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub log: TrainLog,
    /// Snapshot taken at the best probe, when probing ran.
    pub best: Option<GanModel>,
}

impl TrainOutcome {
    pub fn best_iteration(&self) -> Option<usize> {
        self.log.select_stop_iteration().ok()
    }
}

/// Trains `model` on the rows of `data` (original feature space).
///
/// Conditional frameworks need `labels`, one condition class per row. The
/// model fits its own standardization on `data`; generated rows are mapped
/// back through it.
pub fn train(
    model: &mut GanModel,
    data: &Matrix,
    labels: Option<&[usize]>,
    probe: Option<&mut ProbeFn<'_>>,
) -> Result<TrainOutcome> {
    train_observed(model, data, labels, probe, &mut NoObserver)
}

pub fn train_observed(
    model: &mut GanModel,
    data: &Matrix,
    labels: Option<&[usize]>,
    mut probe: Option<&mut ProbeFn<'_>>,
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    let config = model.config.clone();
    config.validate()?;
    if data.rows() == 0 {
        return Err(Error::data("no rows to train on"));
    }
    if data.cols() != model.feature_dim {
        return Err(Error::Shape {
            op: "gan train",
            left: data.shape(),
            right: (data.rows(), model.feature_dim),
        });
    }
    let conditions = match (config.framework.is_conditional(), labels) {
        (true, Some(l)) => {
            if l.len() != data.rows() {
                return Err(Error::param(format!("{} condition labels for {} rows", l.len(), data.rows())));
            }
            let onehot = one_hot(l, config.condition_classes)?;
            let mut counts = vec![0; config.condition_classes];
            l.iter().for_each(|&c| counts[c] += 1);
            model.condition_counts = counts;
            Some(onehot)
        }
        (true, None) => return Err(Error::param(format!("{} training needs condition labels", config.framework))),
        (false, _) => None,
    };

    let scaler = Scaler::fit(data);
    let x = scaler.transform(data);
    model.scaler = Some(scaler);

    let adam = AdamConfig {
        learning_rate: config.learning_rate,
        beta1: config.beta1,
        beta2: config.beta2,
        epsilon: config.epsilon,
    };
    let mut d_opt = AdamState::new(&model.discriminator.params, adam);
    let mut g_opt = AdamState::new(&model.generator.params, adam);
    let mut rng = rng::substream(config.seed, &[rng::tag("train")]);

    let mut log = TrainLog::default();
    let mut best: Option<(f64, GanModel)> = None;

    for it in 1..=config.max_iterations {
        let mut j_d = 0.0;
        for _ in 0..config.d_steps {
            j_d = discriminator_step(model, &x, conditions.as_ref(), &mut d_opt, &mut rng)?;
            if config.framework.is_wasserstein() {
                clip_weights_in_place(&mut model.discriminator.params, config.clip_value);
            }
            log.d_updates += 1;
            observer.discriminator_updated(it, &model.discriminator.params);
        }
        let j_g = generator_step(model, conditions.as_ref(), &mut g_opt, &mut rng)?;
        log.g_updates += 1;
        observer.generator_updated(it, model);

        if !j_d.is_finite() || !j_g.is_finite() {
            return Err(Error::Divergence {
                iteration: it,
                detail: format!("non-finite loss (J_D = {j_d}, J_G = {j_g})"),
            });
        }

        let mut probe_accuracy = None;
        if let Some(p) = probe.as_deref_mut() {
            if config.probe_every > 0 && it % config.probe_every == 0 {
                let acc = p(it, model)?;
                if !(0.0..=1.0).contains(&acc) {
                    return Err(Error::Contract(format!("probe returned {acc}, outside [0, 1]")));
                }
                if best.as_ref().is_none_or(|(b, _)| acc < *b) {
                    best = Some((acc, model.clone()));
                }
                probe_accuracy = Some(acc);
            }
        }
        log.records.push(TrainRecord {
            iteration: it,
            j_d,
            j_g,
            probe_accuracy,
        });
    }

    Ok(TrainOutcome {
        log,
        best: best.map(|b| b.1),
    })
}

fn batch_indices(rng: &mut Stream, n: usize, m: usize) -> Vec<usize> {
    if n >= m {
        index::sample(rng, n, m).into_vec()
    } else {
        (0..m).map(|_| rng.gen_range(0..n)).collect()
    }
}

fn discriminator_step(
    model: &mut GanModel,
    x: &Matrix,
    conditions: Option<&Matrix>,
    opt: &mut AdamState,
    rng: &mut Stream,
) -> Result<f64> {
    let cfg = &model.config;
    let m = cfg.batch_size;
    let idx = batch_indices(rng, x.rows(), m);
    let real = x.select_rows(&idx);
    let cond = conditions.map(|c| c.select_rows(&idx));
    let noise = sample_noise(m, cfg.noise_dim, rng);
    let fake = model.generate_scaled(&noise, cond.as_ref())?;
    let (real_in, fake_in) = match &cond {
        Some(c) => (real.hstack(c)?, fake.hstack(c)?),
        None => (real, fake),
    };

    let mut tape = Tape::new();
    let vars = model.discriminator.params.bind(&mut tape);
    let r = tape.leaf(real_in);
    let f = tape.leaf(fake_in);
    let spec = &model.discriminator.spec;
    let d_real = vars.forward(&mut tape, spec, r, Mode::Train, rng)?;
    let d_fake = vars.forward(&mut tape, spec, f, Mode::Train, rng)?;
    let loss = match cfg.framework {
        Framework::Gan => losses::d_loss_gan(&mut tape, d_real, d_fake)?,
        Framework::Cgan => losses::cgan_d_loss(&mut tape, d_real, d_fake)?,
        Framework::Wgan | Framework::Wcgan => losses::wgan_critic_loss(&mut tape, d_real, d_fake)?,
    };
    tape.backward(loss)?;
    let grads = vars.grads(&tape);
    opt.step(&mut model.discriminator.params, &grads)?;
    Ok(tape.scalar(loss))
}

fn generator_step(
    model: &mut GanModel,
    conditions: Option<&Matrix>,
    opt: &mut AdamState,
    rng: &mut Stream,
) -> Result<f64> {
    let cfg = &model.config;
    let m = cfg.batch_size;
    // conditions for the generator step follow the empirical class mix
    let cond = conditions.map(|c| {
        let idx = batch_indices(rng, c.rows(), m);
        c.select_rows(&idx)
    });
    let noise = sample_noise(m, cfg.noise_dim, rng);
    let g_input = match &cond {
        Some(c) => noise.hstack(c)?,
        None => noise,
    };

    let mut tape = Tape::new();
    let g_vars = model.generator.params.bind(&mut tape);
    let d_vars = model.discriminator.params.bind(&mut tape);
    let z = tape.leaf(g_input);
    let fake = g_vars.forward(&mut tape, &model.generator.spec, z, Mode::Train, rng)?;
    let d_input = match cond {
        Some(c) => {
            let c = tape.leaf(c);
            tape.concat_cols(fake, c)?
        }
        None => fake,
    };
    let d_fake = d_vars.forward(&mut tape, &model.discriminator.spec, d_input, Mode::Train, rng)?;
    let loss = match cfg.framework {
        Framework::Gan => losses::g_loss_nonsaturating(&mut tape, d_fake)?,
        Framework::Cgan => losses::cgan_g_loss(&mut tape, d_fake)?,
        Framework::Wgan | Framework::Wcgan => losses::wgan_g_loss(&mut tape, d_fake),
    };
    tape.backward(loss)?;
    let grads = g_vars.grads(&tape);
    opt.step(&mut model.generator.params, &grads)?;
    Ok(tape.scalar(loss))
}
