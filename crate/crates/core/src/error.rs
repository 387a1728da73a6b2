// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by series construction, model validation and fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("timestamps must be strictly increasing; violation at index {index} ({prev} then {next})")]
    NonMonotone { index: usize, prev: f64, next: f64 },

    #[error("duration at index {index} is not positive: {value}")]
    NonPositiveDuration { index: usize, value: f64 },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("non-finite value at index {index}: {what}")]
    NonFinite { index: usize, what: &'static str },

    #[error("unknown model `{name}`; valid names: {valid}")]
    UnknownModel { name: String, valid: String },

    #[error("calibration: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
