//! Config-driven experiment runner for radial polyharmonic problems.
//!
//! A run reads an [`ExperimentConfig`], executes one command and writes
//! `report.json` (plus `solution.csv` for `solve`) into the output directory.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;

pub use config::{Command, ExperimentConfig, Overrides};
pub use error::CliError;
pub use run::{run, Outcome, SCHEMA_VERSION};
