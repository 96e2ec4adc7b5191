use thiserror::Error;

/// Errors surfaced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter values (non-odd repetition sizes, out-of-range rates, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs outside the numerically supported regime.
    #[error("range error: {0}")]
    Range(String),
    /// Fock-space truncation too small for the requested amplitudes.
    #[error("truncation error: {0}")]
    Truncation(String),
    /// Internal numerical fault (all-zero weights, NaN propagation).
    #[error("numerical fault: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
