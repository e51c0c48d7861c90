//! Monte Carlo benchmarks for reciprocity calibration: MSE against SNR per
//! estimator and grouping scheme, with the averaged constrained CRB.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod table;

use otacal::stacking::Identifiability;
use thiserror::Error;

pub use config::{ConstraintKind, Estimator, ExperimentConfig};
pub use experiment::{crb_sweep, run_experiment, run_trials, summarize, TrialOutcome};
pub use table::{emit_csv, ResultRow, ResultTable};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unidentifiable configuration: {0}")]
    Unidentifiable(Identifiability),

    #[error(transparent)]
    Cal(#[from] otacal::CalError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Cal(otacal::CalError::InvalidArgument(_)) => 2,
            BenchError::Unidentifiable(_) | BenchError::Cal(otacal::CalError::Unidentifiable { .. }) => 3,
            _ => 1,
        }
    }
}
