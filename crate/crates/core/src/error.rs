use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Unknown preset, malformed algebra document, failed Jacobi gate.
    #[error("configuration error: {0}")]
    Config(String),
    /// Arity mismatch, dimension mismatch, invalid window and similar misuse.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not a cocycle in this weight: {0}")]
    NotACocycle(String),
    /// Window too small: results at neighbouring cutoffs disagree.
    #[error("unstable truncation: {0}")]
    Unstable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
