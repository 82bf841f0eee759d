//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input contained NaN or infinity where a finite value is required.
    NonFiniteInput { what: &'static str },
    /// Two matrices that must agree in shape do not.
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Loss hyperparameters violate their constraints.
    InvalidParams(String),
    /// A dataset, model, optimizer, or grid spec violates its constraints.
    InvalidSpec(String),
    /// No stationary point of the negative-class gradient exists on the
    /// scanned interval.
    NoCriticalPoint,
    /// A metric has no defined value for the given inputs, e.g. when no
    /// sample has a relevant label.
    UndefinedMetric(String),
    /// Training produced a non-finite loss.
    Diverged { epoch: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteInput { what } => write!(f, "non-finite value in {what}"),
            Error::ShapeMismatch { expected, got } => write!(
                f,
                "shape mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::InvalidParams(msg) => write!(f, "invalid loss parameters: {msg}"),
            Error::InvalidSpec(msg) => write!(f, "invalid spec: {msg}"),
            Error::NoCriticalPoint => write!(f, "no critical point on the scanned interval"),
            Error::UndefinedMetric(msg) => write!(f, "metric undefined: {msg}"),
            Error::Diverged { epoch } => write!(f, "training diverged at epoch {epoch}"),
        }
    }
}

impl std::error::Error for Error {}
