use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The oracle refused a query because the budget is spent.
    #[error("query budget exhausted after {queries} queries")]
    BudgetExhausted { queries: u64 },

    /// An operator call broke the unbiased black-box model (arity, handles).
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// Exact enumeration was requested above the supported dimension.
    #[error("exact enumeration unavailable for dimension {dim} (limit {limit})")]
    ExactEnumerationUnavailable { dim: usize, limit: usize },

    /// Invalid experiment or CLI configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn ensure_same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(contract(format!("{what}: length mismatch ({a} vs {b})")))
    }
}
