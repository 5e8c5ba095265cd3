//! Experiment harness for `aprid-core`: dataset and instance files,
//! TOML experiment configs, a parallel runner writing per-run CSV
//! trajectories with a manifest, and comparison reports.

pub mod config;
pub mod csvio;
pub mod data;
pub mod error;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod snapshot;

pub use config::{parse_seed_list, Algorithm, ExperimentConfig};
pub use error::{BenchError, Result};
pub use report::{compare_report, sweep, Report};
pub use runner::{run_experiment, ExperimentSummary, Instance, StdClock};
