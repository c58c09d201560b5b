//! Metrics, cross-validation, the generator stopping rule and the two
//! experiment procedures (per-fold oversampling comparison and the
//! augmentation sweep).

mod cv;
mod experiment;
mod metrics;
mod report;
mod sweep;

pub use cv::{stratified_folds, stratified_kfold, stratified_split, FoldSplit};
pub use experiment::{
    fit_generator, run_fold_experiment, ExperimentConfig, FoldAudit, FoldOutcome, GeneratorFit, MetricsReport,
};
pub use metrics::{auc, auprc, classification_metrics, roc_curve, ClassificationMetrics, RocCurve};
pub use report::{aggregate, read_reports_csv, roc_svg, write_aggregate_csv, write_reports_csv, write_sweep_csv, AggregateRow};
pub use sweep::{augmentation_sweep, Source, SweepConfig, SweepRow};

use crate::error::Result;
use crate::gan::TrainLog;

/// Iteration with the lowest probe accuracy, earliest on ties.
pub fn select_stop_iteration(log: &TrainLog) -> Result<usize> {
    log.select_stop_iteration()
}
