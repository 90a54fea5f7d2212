//! Experiment front end for the ACK-holding simulator: release schedules,
//! RTO curves, scenario runs and parameter sweeps, all emitted as CSV.

pub mod commands;
pub mod csvout;
pub mod scenario_file;

use std::path::Path;

use thiserror::Error;

pub use commands::{
    cmd_rto_curve, cmd_run, cmd_schedule, cmd_sweep, run_report, RunReport, SweepParam, SweepRow, RUN_FILES,
};
pub use scenario_file::{load_scenario, parse_scenario, ScenarioSpec};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed scenario files.
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 1,
            Self::Io { .. } | Self::Internal(_) => 2,
        }
    }
}
