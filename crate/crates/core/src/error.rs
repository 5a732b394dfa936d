use thiserror::Error;

use crate::circuit::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A memory/size guard refused the request before allocating.
    #[error("resource guard: {what} = {requested} exceeds limit {limit}")]
    Resource {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid circuit: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    /// The state vector lost normalization beyond tolerance.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Checks `requested <= limit`, producing a [`Error::Resource`] otherwise.
pub(crate) fn guard(what: &'static str, requested: u128, limit: u128) -> Result<()> {
    if requested > limit {
        Err(Error::Resource {
            what,
            requested,
            limit,
        })
    } else {
        Ok(())
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
