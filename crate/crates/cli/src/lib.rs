//! Experiment runner for distributed Wyner-Ziv uplink cooperation: Monte-Carlo
//! rate CDFs, cooperative-set sweeps, comparison against uniform quantization,
//! sum-rate versus number of users and two-user rate regions.
//!
//! Every runner returns a CSV table and a JSON sidecar holding the full
//! configuration, per-trial records and a few summary checks.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig, ScenarioConfig};
pub use experiments::{
    run, run_cdf, run_compare_quantization, run_region, run_sumrate_vs_users, run_vs_bs,
    TrialScenario,
};
pub use output::{ExperimentOutput, Sidecar, Table, TrialRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] dwz_core::DwzError),
}
