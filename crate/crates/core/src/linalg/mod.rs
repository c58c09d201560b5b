//! Dense matrices and a reverse-mode differentiation tape.

mod matrix;
mod tape;

pub use matrix::{squared_distance, Matrix};
pub use tape::{Tape, Var, LOG_EPSILON};
pub(crate) use tape::sigmoid;
