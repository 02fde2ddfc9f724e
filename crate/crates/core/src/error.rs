use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Errors raised by operator evaluation and contract checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value produced by {context}")]
    NonFinite {
        context: &'static str,
        /// Point at which the evaluation was attempted.
        point: Vec<f64>,
    },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("no analytic Jacobian available for this problem")]
    NoJacobian,
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl ViError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        ViError::Contract(msg.into())
    }
}

/// A numeric failure inside a solver run, with the iteration and iterate at
/// which it happened.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("iteration {iteration}: {source}")]
pub struct SolverError {
    pub iteration: usize,
    pub point: Vec<f64>,
    #[source]
    pub source: ViError,
}
