use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("empty sample")]
    EmptySample,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid partition map: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exact enumeration needs {states} states, cap is {cap}")]
    EnumerationCap { states: u128, cap: u64 },

    #[error("quadrature did not converge: last change {change:.3e} bits")]
    NonConvergence { change: f64 },

    #[error("target error {target} is unreachable: bound never drops below {floor}")]
    UnreachableTarget { target: f64, floor: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl InfoError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        InfoError::InvalidParameter(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, InfoError>;
