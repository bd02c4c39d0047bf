use thiserror::Error;

/// Errors raised by the exact algebra, the regularization engines, the solvers
/// and the net analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("affine arguments differ: {left} vs {right}")]
    ArgMismatch { left: String, right: String },

    #[error("unsupported argument: {0}")]
    UnsupportedArg(String),

    #[error("invalid affine argument: coefficients of x and t are both zero")]
    DegenerateArg,

    #[error("quadrature failed: error estimate {achieved:.3e} exceeds tolerance {requested:.3e} after {intervals} intervals")]
    QuadratureFailure {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },

    #[error(
        "test function `{name}` provides derivatives up to order {available}, {required} required"
    )]
    InsufficientSmoothness {
        name: String,
        available: usize,
        required: usize,
    },

    #[error("grid spacing {spacing:.3e} exceeds eps/8 = {limit:.3e}")]
    GridUnderResolved { spacing: f64, limit: f64 },

    #[error("lambda = {lambda} is not admissible in dimension {n}: {reason}")]
    IntegrabilityViolation { lambda: f64, n: u32, reason: String },

    #[error("blow-up bisection stalled at t = {time:.6e}")]
    StepUnderflow { time: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("instability: |u| = {magnitude:.3e} at t = {time:.6e}, x = {x:.6e}")]
    Instability { magnitude: f64, time: f64, x: f64 },

    #[error("growth fit degenerate: {0}")]
    FitDegenerate(String),

    #[error("empty measurement at time slice t = {0}")]
    EmptyMeasurement(f64),

    #[error("empty forecast trace at time slice t = {0}")]
    EmptyForecast(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of a numerical method (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::StepUnderflow { .. }
                | Error::Instability { .. }
                | Error::FitDegenerate(_)
                | Error::GridUnderResolved { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
