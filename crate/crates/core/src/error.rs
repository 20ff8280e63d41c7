use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Points and values are carried as `f64` so the error type does not depend on the scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid exponents for {family}: {reason}")]
    InvalidExponents { family: String, reason: String },

    #[error("estimated lower index p- = {p_minus} is not above 2")]
    IndexOutOfRange { p_minus: f64 },

    #[error("t g'(t)/g(t) is not finite at t = {t}")]
    NonFiniteRatio { t: f64 },

    #[error("invalid sampling range: {0}")]
    InvalidRange(String),

    #[error("exterior model grows too fast for a finite tail bound (exponent {exponent})")]
    UnboundedTail { exponent: f64 },

    #[error("holder quotient needs distinct points")]
    CoincidentPoints,

    #[error("field is not C^{{1,1}} at {x:?}: {reason}")]
    NotC11At { x: Vec<f64>, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid operator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("solver diverged at iteration {iteration}: residual {residual} vs best {best}")]
    Diverged { iteration: usize, residual: f64, best: f64 },

    #[error("solver stalled at iteration {iteration}: step size {tau} underflowed")]
    StalledStep { iteration: usize, tau: f64 },

    #[error("solution is not positive inside the domain: u = {value} at {x:?}")]
    NotPositive { x: Vec<f64>, value: f64 },

    #[error("hypothesis violated ({which}): {detail}")]
    HypothesisViolated { which: String, detail: String },

    #[error("probe mask is empty")]
    EmptyMask,

    #[error("field format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
