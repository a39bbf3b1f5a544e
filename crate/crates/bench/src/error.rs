use thiserror::Error;

use crate::config::ConfigError;
use crate::fit::FitError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("fit failed: {0}")]
    Fit(#[from] FitError),
    #[error(transparent)]
    Solver(#[from] abbflow::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("steady state not reached within {steps} steps (relative change {change:.3e})")]
    NotConverged { steps: u64, change: f64 },
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
