use thiserror::Error;

/// Failure categories surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("spec violation at mark {mark:?}: {reason}")]
    SpecViolation { mark: Vec<f64>, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error at jump {index}: {detail}")]
    NumericAtJump { index: usize, detail: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular jump at index {index}: 1 + jump = {value:e}")]
    SingularJump { index: usize, value: f64 },

    #[error("hypothesis violation at jump {index}: {detail}")]
    HypothesisViolation { index: usize, detail: String },

    #[error("step control underflow: {0}")]
    Stiffness(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Broad category used by front ends to map failures onto exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Configuration(_) | Error::Input(_) | Error::Domain(_) => ErrorCategory::Input,
            Error::SpecViolation { .. } | Error::HypothesisViolation { .. } | Error::Sampler(_) => {
                ErrorCategory::SpecViolation
            }
            Error::NumericAtJump { .. }
            | Error::Numeric(_)
            | Error::SingularJump { .. }
            | Error::Stiffness(_)
            | Error::Internal(_) => ErrorCategory::Numeric,
            Error::Io(_) | Error::Csv(_) => ErrorCategory::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    SpecViolation,
    Numeric,
    Io,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
