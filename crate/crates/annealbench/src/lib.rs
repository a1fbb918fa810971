//! File formats, the simulation pipeline and the command-line front end
//! for `annealbench-core`.

pub mod cli;
pub mod error;
pub mod formats;
pub mod pipeline;

pub use error::{AppError, Result};
