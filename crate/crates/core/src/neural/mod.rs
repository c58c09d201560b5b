//! Multilayer perceptrons on top of the differentiation tape.

mod adam;
mod io;
mod mlp;

pub use adam::{AdamConfig, AdamState};
pub use io::{read_params, write_params};
pub use mlp::{bce_loss, init_mlp, Dense, Mlp, MlpParams, MlpSpec, MlpVars, Mode, OutputActivation};
