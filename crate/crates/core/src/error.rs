use thiserror::Error;

/// Errors produced by algebra operations, steppers and integration drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operation requires a non-empty state")]
    EmptyState,

    #[error("linear combination needs 1 to {max} terms, got {found}")]
    TermCount { found: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t}: dt = {dt:e}")]
    StepSizeUnderflow { t: f64, dt: f64 },

    #[error("{rejections} consecutive rejected steps at t = {t} (dt = {dt:e})")]
    TooManyRejections { t: f64, dt: f64, rejections: usize },

    #[error("matrix is numerically singular (pivot column {column})")]
    SingularMatrix { column: usize },

    #[error("Newton iteration did not converge after {iterations} iterations")]
    NewtonDivergence { iterations: usize },

    #[error("query time {t} outside the interval [{t_prev}, {t_cur}]")]
    OutOfRange { t: f64, t_prev: f64, t_cur: f64 },

    #[error("stepper has not been initialized")]
    NotInitialized,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical process itself (as opposed to
    /// malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::TooManyRejections { .. }
                | Error::SingularMatrix { .. }
                | Error::NewtonDivergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
