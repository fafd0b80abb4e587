//! Cross-validation benchmark harness for the `eel-core` learners.
//!
//! [`experiment::run_experiment`] runs one method over a stratified
//! `folds x runs` grid and produces an [`experiment::ExperimentReport`];
//! [`report`] turns reports into JSON, CSV and markdown and compares two of
//! them with paired t-tests.

pub mod config;
mod error;
pub mod experiment;
pub mod prep;
pub mod report;

pub use crate::config::{
    load_config, parse_config, parse_config_onto, ExperimentConfig, Method, Precision, Profile,
};
pub use crate::error::{BenchError, Result};
pub use crate::experiment::{
    cell_seed, run_experiment, run_on, ExperimentReport, ExperimentRun, RunOptions, RunRecord,
    Summary, TelemetryRow,
};
pub use crate::report::{compare_reports, emit_report, Pairing, ReportComparison, ReportFormat};
