//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants carry enough context to name the offending input (line number,
/// evaluation point, required half-plane) so that callers can surface
/// actionable messages without re-deriving state.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input stream (CSV or JSON manifest).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structural invariant of the data model failed.
    #[error("{0}")]
    Invariant(String),

    /// Counting-function evaluation beyond the completeness radius.
    #[error("beyond completeness radius: x = {x}, cutoff = {cutoff}")]
    BeyondCutoff { x: f64, cutoff: f64 },

    /// A Dirichlet series was requested outside its certified half-plane.
    #[error(
        "series diverges for {context}: Re(s) = {re_s} is not > {abscissa}; \
         need Re(s) > {abscissa}"
    )]
    Divergence {
        context: String,
        re_s: f64,
        abscissa: f64,
    },

    /// Functional-equation evaluation without a known volume.
    #[error("functional-equation evaluation requires volume")]
    MissingVolume,

    /// Adaptive quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Synthetic-generation profile rejected its parameters.
    #[error("generation error: {0}")]
    Generation(String),

    /// I/O failure while reading or writing spectra.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
