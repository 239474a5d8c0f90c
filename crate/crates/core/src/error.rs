use thiserror::Error;

use crate::speclang::ParseError;

/// Errors raised by simulation, oracle, and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular design: column `{column}` is constant or collinear with earlier columns")]
    SingularDesign { column: String },

    #[error("too few complete records: {available} available, {required} required")]
    InsufficientData { available: usize, required: usize },

    #[error("inestimable: {0}")]
    Inestimable(String),

    #[error("estimand undefined: {0}")]
    EstimandUndefined(String),

    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    #[error("estimator unstable: {failures} of {attempts} resamples failed")]
    Instability { failures: usize, attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::SingularDesign { .. } => "singular_design",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::Inestimable(_) => "inestimable",
            Error::EstimandUndefined(_) => "estimand_undefined",
            Error::MonotonicityViolation(_) => "monotonicity_violation",
            Error::Instability { .. } => "unstable",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Plan(_) => "plan",
            Error::Diagnostic(_) => "diagnostic",
            Error::Parse(_) => "parse",
        }
    }

    /// Failure rate carried by an [`Error::Instability`].
    pub fn failure_rate(&self) -> Option<f64> {
        match self {
            Error::Instability { failures, attempts } if *attempts > 0 => {
                Some(*failures as f64 / *attempts as f64)
            }
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
