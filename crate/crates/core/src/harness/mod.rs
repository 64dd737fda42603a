//! Parameter sweeps, scaling fits and reports.

pub mod fit;
pub mod report;
pub mod spec;
pub mod sweep;

use thiserror::Error;

pub use fit::{fit_scaling, FitError, FitPoint, ScalingFit, Statistic};
pub use report::{emit_report, plot_svg, write_csv, ReportFiles, CSV_HEADER};
pub use spec::{EllRule, ExperimentSpec, MaxRoundsRule, SweepPoint, X0Rule, ZRule};
pub use sweep::{resolve_workers, run_trial, sweep, trial_seed, ResultRow, WORKERS_ENV};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("resource cap: {0}")]
    Cap(String),
    #[error("output error: {0}")]
    Io(String),
}

impl HarnessError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Spec(_) => 2,
            HarnessError::Cap(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }
}
