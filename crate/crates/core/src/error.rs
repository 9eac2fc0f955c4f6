use thiserror::Error;

use crate::math::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the region where a model or field is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called with arguments that violate its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A field evaluated to NaN or infinity.
    #[error("non-finite value while evaluating {what}")]
    NonFinite { what: String },

    /// The measure condition fails, so no conformally Hamiltonian form exists.
    #[error("invariant-measure condition violated: residual ({r1:e}, {r2:e})")]
    MeasureViolated { r1: f64, r2: f64 },

    #[error("unsupported system specification: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Adaptive integration could not keep the step size above the floor.
    #[error("step size underflow at t = {t} (h = {h:e}); last good state {last:?}")]
    StepUnderflow { t: f64, h: f64, last: Vec<f64> },

    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),

    /// A numerical result missed its tolerance.
    #[error("tolerance failure: {what} = {value:e} exceeds {tolerance:e}{hint}")]
    Tolerance {
        what: String,
        value: f64,
        tolerance: f64,
        hint: String,
    },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn non_finite(what: impl Into<String>) -> Self {
        Error::NonFinite { what: what.into() }
    }

    pub(crate) fn check_finite(v: Vec3, what: &str) -> Result<Vec3> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite(what))
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
