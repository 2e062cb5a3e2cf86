use thiserror::Error;

use crate::interval::Interval;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("division by an interval containing zero: {divisor}")]
    DivisionByZeroInterval { divisor: Interval },

    #[error("{func} is not defined on {interval}")]
    DomainError { func: &'static str, interval: Interval },

    #[error("enclosure is unbounded: {0}")]
    UnboundedEnclosure(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { name: String, pos: usize },

    #[error("variable `{name}` is out of range for a {arity}-variable formula")]
    VariableOutOfRange { name: String, arity: usize },

    #[error("point evaluation failed at node {node}: {detail}")]
    EvalDomain { node: usize, detail: String },

    #[error("interval extension is undefined: {0}")]
    ExtensionUndefined(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid target spec: {0}")]
    InvalidSpec(String),

    #[error("grid quadrature supports at most 3 dimensions, got {0}")]
    DimensionTooLarge(usize),

    #[error("envelope mass is zero or not finite")]
    DegenerateMass,

    #[error("point {0:?} lies outside the partition domain")]
    OutOfDomain(Vec<f64>),

    #[error("envelope violated at {point:?}: target {target} > envelope {envelope}")]
    EnvelopeViolation {
        point: Vec<f64>,
        target: f64,
        envelope: f64,
    },

    #[error("need at least 2 chains of equal length >= 2")]
    InsufficientChains,

    #[error("trial cap of {0} proposals reached before the requested acceptances")]
    TrialCapExceeded(u64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Errors caused by malformed user input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnknownFunction { .. }
                | Error::VariableOutOfRange { .. }
                | Error::InvalidSpec(_)
                | Error::Config(_)
        )
    }
}
