use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("singular pair: points {i} and {j} coincide")]
    SingularPair { i: usize, j: usize },
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("accuracy target {target:e} not reached (achieved {achieved:e})")]
    Accuracy { target: f64, achieved: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("point {index} lies outside the domain")]
    Domain { index: usize },
    #[error("problem too large: {0}")]
    Size(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter { name, reason: reason.into() }
}
