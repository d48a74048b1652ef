//! Batch runner: reads a JSON run config, drives one experiment engine and
//! writes a CSV table plus a JSON summary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod noise;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{run_experiment, validate, RunOutput, Summary};
