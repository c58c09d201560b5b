use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;

use crate::data::{Dataset, Scaler};
use crate::error::{Error, Result};
use crate::gan::GanModel;
use crate::models::Classifier;
use crate::rng;

use super::cv::{stratified_split, FoldSplit};
use super::experiment::MetricsReport;

/// Where the extra minority rows of a sweep step come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Real,
    TrainedGan,
    UntrainedGan,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Real, Source::TrainedGan, Source::UntrainedGan];

    pub fn name(self) -> &'static str {
        match self {
            Source::Real => "real",
            Source::TrainedGan => "trained_gan",
            Source::UntrainedGan => "untrained_gan",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|src| src.name() == s)
            .ok_or_else(|| Error::param(format!("unknown sweep source {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub test_fraction: f64,
    pub seed: u64,
    pub classifier: Classifier,
    pub threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 0,
            classifier: Classifier::Logistic,
            threshold: 0.5,
        }
    }
}

impl SweepConfig {
    /// The fixed stratified holdout every sweep step shares.
    pub fn split(&self, dataset: &Dataset) -> Result<FoldSplit> {
        stratified_split(&dataset.labels, self.test_fraction, rng::derive(self.seed, &[rng::tag("sweep")]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub source: Source,
    pub fraction: f64,
    pub added: usize,
    pub report: MetricsReport,
}

/// Adds `⌊fraction · n⌋` extra minority rows to the training split (with
/// `n` its minority count) and scores the classifier on the fixed test
/// split. Real rows are drawn without replacement from the training
/// minority; generated rows come from `trained` or from a freshly
/// initialized generator of the same configuration.
pub fn augmentation_sweep(
    dataset: &Dataset,
    fractions: &[f64],
    sources: &[Source],
    trained: Option<&GanModel>,
    config: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::param(format!("sweep fraction {f} outside [0, 1]")));
    }
    let needs_model = sources.iter().any(|s| *s != Source::Real);
    if needs_model && trained.is_none() {
        return Err(Error::param("generator sources need a trained model"));
    }
    if let Some(m) = trained {
        if m.feature_dim != dataset.n_features() {
            return Err(Error::param(format!(
                "generator produces {} features, dataset has {}",
                m.feature_dim,
                dataset.n_features()
            )));
        }
    }
    let untrained = match trained {
        Some(m) if sources.contains(&Source::UntrainedGan) => {
            let mut c = m.config.clone();
            c.seed = rng::derive(config.seed, &[rng::tag("untrained")]);
            Some(GanModel::new(c, m.feature_dim)?)
        }
        _ => None,
    };

    let split = config.split(dataset)?;
    let train_raw = dataset.subset(&split.train);
    let test_raw = dataset.subset(&split.test);
    let scaler = Scaler::fit(&train_raw.features);
    let test_features = scaler.transform(&test_raw.features);
    let minority = train_raw.class_rows(1);

    let mut rows = Vec::with_capacity(sources.len() * fractions.len());
    for &source in sources {
        for (step, &fraction) in fractions.iter().enumerate() {
            let added = (fraction * minority.rows() as f64).floor() as usize;
            let seed = rng::derive(config.seed, &[rng::tag(source.name()), step as u64]);
            let extra = match source {
                Source::Real => {
                    let mut r = rng::stream(seed);
                    let mut idx = sample(&mut r, minority.rows(), added).into_vec();
                    idx.sort_unstable();
                    minority.select_rows(&idx)
                }
                Source::TrainedGan => trained.unwrap().generate_mixed(added, seed)?,
                Source::UntrainedGan => untrained.as_ref().unwrap().generate_mixed(added, seed)?,
            };
            let mut train = train_raw.clone();
            train.append(&extra, 1)?;
            train.features = scaler.transform(&train.features);
            let model = config.classifier.fit(&train)?;
            let scores = model.predict_proba(&test_features)?;
            let report = MetricsReport::score(
                source.name(),
                config.classifier.name(),
                0,
                &scores,
                &test_raw.labels,
                config.threshold,
            )?;
            rows.push(SweepRow {
                source,
                fraction,
                added,
                report,
            });
        }
    }
    Ok(rows)
}
