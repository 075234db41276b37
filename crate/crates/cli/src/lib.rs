//! Experiment matrices over the `adacons` simulator: flag/config parsing,
//! execution and CSV reporting.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{parse_config, AggregatorChoice, ExperimentMatrix, UsageError, OUT_DIR_ENV};
pub use runner::{run_matrix, MatrixOutcome, RunError};
