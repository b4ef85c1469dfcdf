use thiserror::Error;

use crate::chain::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Syntax error in a term, rational, or epsilon expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("invalid identifier {text:?}: {reason}")]
    Identifier { text: String, reason: &'static str },

    #[error("choice weight {0} lies outside [0,1]")]
    WeightOutOfRange(String),

    #[error("formal sum: {0}")]
    FormalSum(String),

    #[error("invalid chain: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidChain(Vec<Violation>),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("state cap of {cap} exceeded while exploring the reachable chain")]
    StateCapExceeded { cap: usize },

    #[error("system variable {var} is not guarded in the right-hand side of {equation}")]
    Unguarded { var: String, equation: String },

    #[error("discount {0} outside the admissible range")]
    InvalidDiscount(String),

    #[error("tolerance must be positive")]
    InvalidTolerance,

    #[error("no convergence after {iterations} iterations (remaining gap {gap:e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Box<crate::metric::DistanceEnclosure<f64>>,
    },

    #[error("judgment is not checkable semantically: {0}")]
    NotCheckable(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
