use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("incompatible right-hand side: {}", describe_violations(.violations))]
    Incompatible { violations: Vec<Violation> },

    #[error("singular parameters: {0}")]
    SingularParameters(String),

    #[error("divergence detected at step {step}")]
    Divergence { step: u64 },

    #[error("eigensolver did not converge after {restarts} restarts (worst residual {worst_residual:.3e})")]
    NoConvergence {
        restarts: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },
}

/// One violated solvability relation of a singular boundary system.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub relation: String,
    pub residual: f64,
}

fn describe_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("{} (residual {:.3e})", v.relation, v.residual))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
