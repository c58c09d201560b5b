//! Tabular dataset handling: CSV ingestion, standardization and a synthetic
//! imbalanced-data generator for runs without the real transactions file.

mod csvio;
mod dataset;
mod scaler;
mod synth;

pub use csvio::{load_csv, read_csv, write_csv, LABEL_COLUMN};
pub use dataset::Dataset;
pub use scaler::{Scaler, Standardized};
pub use synth::SynthSpec;
