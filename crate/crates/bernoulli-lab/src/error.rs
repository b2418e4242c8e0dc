//! Error types shared across the crate.
//!
//! The variants mirror the CLI exit codes: validation/configuration problems
//! are user-facing (exit 2), convergence failures are reported in-band by the
//! solver and only become exit 3 when a downstream step requires a converged
//! field, and internal errors (exit 4) indicate a broken invariant.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A domain, datum, or family description is malformed.
    #[error("validation error: {0}")]
    Validation(String),

    /// Parameters are structurally fine but unusable (e.g. grid spacing too
    /// coarse to produce interior cells).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument to an operation is outside its stated domain.
    #[error("argument error: {0}")]
    Argument(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A required solve did not converge.
    #[error("solver did not converge: {0}")]
    Convergence(String),

    /// A mathematical guarantee failed; aborting is the only safe option.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Config(_) | Error::Argument(_) | Error::Json(_) => 2,
            Error::GridMismatch(_) => 2,
            Error::Convergence(_) => 3,
            Error::Internal(_) | Error::Io(_) => 4,
        }
    }
}
