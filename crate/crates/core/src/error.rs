use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical and model-building routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at {0}")]
    NonFinite(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid polynomial: {0}")]
    Polynomial(String),

    #[error("matrix is singular to tolerance (pivot magnitude {pivot:e} at column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("{what} did not converge after {iterations} iterations (max residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("spectral inequality violated for eigenvalue {lambda}: {check}")]
    LemmaViolation { lambda: Complex64, check: String },

    #[error("point {z} is within {distance:e} of the spectrum")]
    NearSpectrum { z: Complex64, distance: f64 },

    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by a bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::NonFinite(_)
                | Error::Domain(_)
                | Error::Polynomial(_)
                | Error::Structure(_)
                | Error::Validation(_)
                | Error::Parse { .. }
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
