//! Experiment runner for lent particle Γ computations: config parsing,
//! path-parallel evaluation and reproducible output files.

// `!(x > 0.0)` is used deliberately so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod config;
pub mod error;
pub mod experiment;
pub mod manifest;

pub use config::{parse_config, ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use experiment::{compute_paths, run_experiment, RunOutput};
pub use manifest::{build_manifest, write_outputs, Manifest};
