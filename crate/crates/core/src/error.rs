use thiserror::Error;

use crate::numerics::Enclosure;

/// Errors raised by evaluation, ordering and verification.
#[derive(Clone, Debug, Error)]
pub enum TvError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("budget exhausted at {bits} bits (width {width:.3e}); partial enclosure {partial}")]
    BudgetExceeded {
        partial: Enclosure,
        bits: u32,
        width: f64,
    },

    #[error("enumeration frontier undecidable at {node} against threshold {threshold}")]
    Frontier { node: String, threshold: String },

    #[error("band enumeration undecidable at {node}")]
    Band { node: String },

    #[error("values of {a} and {b} could not be separated")]
    Collision { a: String, b: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl TvError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        TvError::InvalidArgument(msg.into())
    }
}
