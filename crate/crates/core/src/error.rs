use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("domains differ: [{a0}, {b0}] vs [{a1}, {b1}]")]
    DomainMismatch { a0: f64, b0: f64, a1: f64, b1: f64 },

    #[error(
        "Riemann-Stieltjes limit does not exist: integrand and integrator are both discontinuous at {points:?}"
    )]
    CommonDiscontinuity { points: Vec<f64> },

    #[error("{what}: {count} exceeds the enumeration cap of {cap}")]
    EnumerationCap { what: &'static str, count: usize, cap: usize },

    #[error("hypotheses fail: {0}")]
    HypothesesFailed(String),

    #[error("dual #{index} violates the polar constraint (gauge {gauge} > 1)")]
    PolarConstraint { index: usize, gauge: f64 },

    #[error("function is not right-continuous at {t}")]
    NotRightContinuous { t: f64 },

    #[error("function is not piecewise constant")]
    NotStep,

    #[error("function is discontinuous at {points:?}")]
    Discontinuous { points: Vec<f64> },

    #[error("sup norm {0} exceeds 1")]
    SupNormExceeded(f64),

    #[error("linear program failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
