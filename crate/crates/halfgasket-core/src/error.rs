//! Crate-wide error type and result alias.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
///
/// The CLI maps these onto exit codes: validation-type errors
/// ([`Error::Domain`], [`Error::Parse`], [`Error::LevelCap`],
/// [`Error::NonConvergent`], [`Error::Io`]) exit with code 2;
/// computation-type errors ([`Error::Convergence`], [`Error::Truncation`],
/// [`Error::Consistency`]) exit with code 3.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// An argument lies outside the domain of the operation
    /// (wrong side of the symmetry axis, not a special point, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// A level or truncation beyond the configured cap.
    #[error("level {requested} exceeds the maximum {max} (raise HALFGASKET_MAX_LEVEL to override)")]
    LevelCap { requested: usize, max: usize },

    /// Malformed textual input: JSON schema, scalar syntax, point syntax.
    #[error("parse error: {0}")]
    Parse(String),

    /// A limit or iteration failed to settle within its window.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// The request reaches past the truncation the data was built with.
    #[error("truncation exceeded: {0}")]
    Truncation(String),

    /// Two independent routes to the same quantity disagreed.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// Boundary data whose tail has no limit (|ratio| ≥ 1).
    #[error("non-convergent boundary data: {0}")]
    NonConvergent(String),

    /// Underlying I/O failure (CLI file handling).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
