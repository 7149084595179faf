use thiserror::Error;

use crate::numerics::NumericsError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("function is not strictly monotone: f({x1}) = {y1}, f({x2}) = {y2}")]
    NotMonotone { x1: f64, y1: f64, x2: f64, y2: f64 },

    #[error("function is not differentiable at {0} (breakpoint)")]
    NotDifferentiable(f64),

    #[error("value {y} lies outside the range hull ({lo}, {hi})")]
    Range { y: f64, lo: f64, hi: f64 },

    #[error("generator has a jump discontinuity at {0}")]
    NotContinuous(f64),

    #[error("bad indices: {0}")]
    BadIndices(String),

    #[error("cf + d = {value} is not positive at x = {x}")]
    SignViolation { x: f64, value: f64 },

    #[error("Moebius parameters are degenerate: ad - bc = {0}")]
    DegenerateParams(f64),

    #[error("fit failed: {reason}")]
    FitFailed { reason: String, witness: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
