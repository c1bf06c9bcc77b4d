// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the detector, its building blocks and the drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("penalty must be finite and non-negative, got {0}")]
    InvalidPenalty(f64),

    #[error("loss pieces do not tile the real line: {0}")]
    NotTiling(String),

    #[error("function is unbounded below on piece ({lo}, {hi}]")]
    UnboundedBelow { lo: f64, hi: f64 },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid loss parameters: {0}")]
    InvalidLoss(String),

    #[error("need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },

    #[error(
        "noise scale estimate is zero (constant or near-constant differences); \
         supply K and beta explicitly"
    )]
    DegenerateScale,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("exact dynamic program limited to n <= {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no observations consumed yet")]
    Empty,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Returns the first non-finite entry of `values`, if any.
pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
