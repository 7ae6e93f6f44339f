//! Experiment runners and artifact writers for the vertex-noise library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ConfigOverrides, Experiment, ExperimentConfig};
pub use error::{CliError, Result};
pub use output::{write_outputs, ExperimentOutput};
