use crate::data::{Dataset, Scaler};
use crate::error::{Error, Result};
use crate::gan::{self, Framework, GanConfig, GanModel, TrainLog};
use crate::linalg::Matrix;
use crate::models::{probe_accuracy, Classifier, Fitted, ProbeConfig};
use crate::resampling::{balance, kmeans, BalancePlan, ConditionLabels, Method};
use crate::{par, rng};

use super::cv::stratified_kfold;
use super::metrics::{auc, auprc, classification_metrics};

/// One row of the per-fold results table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub sampler: String,
    pub classifier: String,
    pub fold: usize,
    pub auc: f64,
    pub auprc: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    /// Some confusion-matrix ratio had a zero denominator.
    pub undefined: bool,
}

impl MetricsReport {
    pub const METRICS: [&'static str; 5] = ["auc", "auprc", "recall", "precision", "f1"];

    pub fn score(sampler: &str, classifier: &str, fold: usize, scores: &[f64], labels: &[u8], threshold: f64) -> Result<Self> {
        let c = classification_metrics(scores, labels, threshold);
        Ok(Self {
            sampler: sampler.to_string(),
            classifier: classifier.to_string(),
            fold,
            auc: auc(scores, labels)?,
            auprc: auprc(scores, labels)?,
            recall: c.recall,
            precision: c.precision,
            f1: c.f1,
            undefined: c.undefined,
        })
    }

    pub fn values(&self) -> [f64; 5] {
        [self.auc, self.auprc, self.recall, self.precision, self.f1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub seed: u64,
    pub classifier: Classifier,
    /// `key=value` overrides applied on top of each framework's preset.
    pub gan_overrides: Vec<(String, String)>,
    pub probe: ProbeConfig,
    pub smote_k: usize,
    pub adasyn_k: usize,
    pub threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            classifier: Classifier::Logistic,
            gan_overrides: Vec::new(),
            probe: ProbeConfig::default(),
            smote_k: 5,
            adasyn_k: 5,
            threshold: 0.5,
        }
    }
}

impl ExperimentConfig {
    pub fn gan_config(&self, framework: Framework) -> Result<GanConfig> {
        let mut config = GanConfig::preset(framework);
        for (k, v) in &self.gan_overrides {
            config.set(k, v)?;
        }
        config.framework = framework;
        config.validate()?;
        Ok(config)
    }
}

/// A generator trained with probe-driven snapshot selection.
#[derive(Debug, Clone)]
pub struct GeneratorFit {
    /// The snapshot at the selected stop iteration, or the final weights
    /// when no probe ran.
    pub model: GanModel,
    pub log: TrainLog,
    pub stop_iteration: Option<usize>,
    pub conditions: Option<ConditionLabels>,
}

/// Trains a generator on `minority` (original feature space). Conditional
/// frameworks get k-means labels computed on the standardized rows. Every
/// `probe_every` iterations the model generates as many rows as `minority`
/// has and the boosted-tree probe scores how separable they are.
pub fn fit_generator(minority: &Matrix, config: &GanConfig, probe: &ProbeConfig) -> Result<GeneratorFit> {
    let seed = config.seed;
    let conditions = if config.framework.is_conditional() {
        let scaled = Scaler::fit(minority).transform(minority);
        Some(kmeans(&scaled, config.condition_classes, rng::derive(seed, &[rng::tag("conditions")]))?)
    } else {
        None
    };
    let mut model = GanModel::new(config.clone(), minority.cols())?;
    let n = minority.rows();
    let mut probe_fn = |iteration: usize, m: &GanModel| -> Result<f64> {
        let fake = m.generate_mixed(n, rng::derive(seed, &[rng::tag("probe-draw"), iteration as u64]))?;
        probe_accuracy(minority, &fake, probe, rng::derive(seed, &[rng::tag("probe"), iteration as u64]))
    };
    let outcome = gan::train(
        &mut model,
        minority,
        conditions.as_ref().map(|c| c.labels.as_slice()),
        Some(&mut probe_fn),
    )?;
    let stop_iteration = outcome.best_iteration();
    Ok(GeneratorFit {
        model: outcome.best.unwrap_or(model),
        log: outcome.log,
        stop_iteration,
        conditions,
    })
}

/// What each stage of a fold was allowed to see, for leakage checks.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAudit {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// Rows the fold's standardization was fitted on.
    pub scaler_rows: Vec<usize>,
    pub scaler: Scaler,
    /// Rows the generator (if any) was trained on.
    pub generator_rows: Vec<usize>,
    /// Synthetic rows added to the classifier's training set.
    pub synthetic_train: usize,
    /// Synthetic rows among the scored test rows.
    pub synthetic_test: usize,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub report: MetricsReport,
    pub scores: Vec<f64>,
    pub test_labels: Vec<u8>,
    pub classifier: Fitted,
    pub generator: Option<GeneratorFit>,
    pub audit: FoldAudit,
}

fn run_fold(
    dataset: &Dataset,
    method: Method,
    config: &ExperimentConfig,
    fold: usize,
    train_rows: &[usize],
    test_rows: &[usize],
) -> Result<FoldOutcome> {
    let fold_seed = rng::derive(config.seed, &[rng::tag("fold"), fold as u64]);
    let train_raw = dataset.subset(train_rows);
    let test_raw = dataset.subset(test_rows);
    let scaler = Scaler::fit(&train_raw.features);
    let mut train = train_raw.clone();
    train.features = scaler.transform(&train_raw.features);
    train.scaler = Some(scaler.clone());

    let minority_label = if train.count(1) <= train.count(0) { 1 } else { 0 };
    let mut generator_rows = Vec::new();
    let generator = match method.framework() {
        Some(fw) => {
            let mut gan_config = config.gan_config(fw)?;
            gan_config.seed = rng::derive(fold_seed, &[rng::tag(fw.name())]);
            let local = train_raw.indices_of(minority_label);
            generator_rows = local.iter().map(|&i| train_rows[i]).collect();
            Some(fit_generator(&train_raw.features.select_rows(&local), &gan_config, &config.probe)?)
        }
        None => None,
    };

    let mut plan = BalancePlan::new(method, fold_seed);
    plan.smote_k = config.smote_k;
    plan.adasyn_k = config.adasyn_k;
    if let Some(g) = &generator {
        plan = plan.with_gan(&g.model, Some(&scaler));
    }
    let augmented = balance(&train, &plan)?;
    let synthetic_train = augmented.n_synthetic();
    let classifier = config.classifier.fit(&augmented.strip())?;

    let test_features = scaler.transform(&test_raw.features);
    let scores = classifier.predict_proba(&test_features)?;
    let report = MetricsReport::score(
        method.name(),
        config.classifier.name(),
        fold,
        &scores,
        &test_raw.labels,
        config.threshold,
    )?;
    Ok(FoldOutcome {
        report,
        scores,
        test_labels: test_raw.labels,
        classifier,
        generator,
        audit: FoldAudit {
            train_rows: train_rows.to_vec(),
            test_rows: test_rows.to_vec(),
            scaler_rows: train_rows.to_vec(),
            scaler,
            generator_rows,
            synthetic_train,
            // the scored matrix is built from test rows alone
            synthetic_test: 0,
        },
    })
}

/// Stratified k-fold evaluation of one oversampling method. Per fold: fit
/// the standardization on the training rows, train the generator on the
/// training minority (generator methods), balance the training rows, fit
/// the classifier and score the untouched test rows. Folds run in parallel.
pub fn run_fold_experiment(dataset: &Dataset, method: Method, config: &ExperimentConfig) -> Result<Vec<FoldOutcome>> {
    let folds = stratified_kfold(dataset, config.folds, rng::derive(config.seed, &[rng::tag("cv")]))?;
    let results = par::map_slice(&folds, |f| {
        run_fold(dataset, method, config, f.fold, &f.train, &f.test).map_err(|e| Error::Fold {
            fold: f.fold,
            source: Box::new(e),
        })
    });
    results.into_iter().collect()
}
