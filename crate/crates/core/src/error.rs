use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("argument {0} lies inside the pole guard of a lattice point")]
    Pole(String),
    #[error("invalid basis index {0}: no basis element has pole order 1")]
    InvalidIndex(i64),
    #[error("wp(u) and wp(v) coincide to tolerance at u = {u}, v = {v}")]
    Collision { u: String, v: String },
    #[error("closure error: {0}")]
    Closure(String),
    #[error("unbound symbol: {0}")]
    Unbound(String),
    #[error("divisibility error: {0}")]
    Divisibility(String),
    #[error("unknown field: {0}")]
    UnknownField(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("extraction error: {0}")]
    Extraction(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
