use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by model construction, contract handling and bounded checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}:{line}: {msg}")]
    ParseAt {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid contract: {0}")]
    Contract(String),

    #[error("value {value} is outside the domain [{lower}, {upper}]")]
    OutOfDomain {
        value: String,
        lower: String,
        upper: String,
    },

    #[error("distance is undefined for {0}")]
    DistanceDomain(String),

    #[error("history length {len} is not below the bound {bound}")]
    Bound { len: usize, bound: usize },

    #[error("enumeration exceeded the node budget of {0}; raise DOPETEST_NODE_BUDGET or lower the depth")]
    Budget(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
