//! Adversarial oversamplers: GAN, conditional GAN, Wasserstein GAN and the
//! conditional Wasserstein variant.

mod config;
mod io;
pub mod losses;
mod model;
mod train;

pub use config::{Framework, GanConfig};
pub use io::{load_model, read_model, save_model, write_model};
pub use losses::clip_weights;
pub use model::{one_hot, sample_noise, GanModel};
pub use train::{train, train_observed, ProbeFn, TrainLog, TrainObserver, TrainOutcome, TrainRecord};
