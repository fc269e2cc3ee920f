//! Experiment scenarios and argument parsing behind the `edgedist` binary.

pub mod args;
pub mod error;
pub mod scenario;

pub use error::{HarnessError, Result};
