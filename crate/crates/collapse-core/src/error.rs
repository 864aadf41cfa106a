use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure classes surfaced by the
/// public operations: contract violations (caller handed inconsistent data),
/// configuration problems (a spec field out of range), resource caps, failed
/// constructions, and grid/domain validation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: field `{field}`: {message}")]
    Config { field: &'static str, message: String },

    #[error("resource cap exceeded: construction needs {needed} terms, cap is {cap}")]
    ResourceCap { needed: usize, cap: usize },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("grid validation failed: {0}")]
    Grid(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Config {
            field,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
