use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("invalid arguments: {0}")]
    InvalidArgs(String),

    #[error("survival function increases between x={lo} and x={hi}")]
    NonMonotoneSurvival { lo: f64, hi: f64 },

    #[error("root finding did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("direction vector norm underflowed")]
    ZeroVector,

    #[error("quadrature did not reach tolerance: value={value}, abs_error={abs_error}, tolerance={tolerance}")]
    QuadratureFailure {
        value: f64,
        abs_error: f64,
        tolerance: f64,
    },

    #[error("epsilon(N) must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("degenerate point configuration: {0}")]
    DegenerateInput(String),

    #[error("no N with log N <= {max_log_n} satisfies the condition")]
    NoSolutionInRange { max_log_n: f64 },

    #[error("model specification: {0}")]
    ModelSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::ConvergenceFailure { .. }
                | Error::DegenerateInput(_)
                | Error::NonMonotoneSurvival { .. }
                | Error::NonPositiveEpsilon(_)
                | Error::NoSolutionInRange { .. }
                | Error::ZeroVector
        )
    }
}
