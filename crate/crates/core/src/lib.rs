// SPDX-License-Identifier: MIT OR Apache-2.0

//! Robust changepoint detection in a univariate series by functional pruning
//! of piecewise-quadratic cost functions.
//!
//! The optimal cost Q_t(θ) of segmenting `y_1..y_t` with the last segment at
//! location θ satisfies
//! Q_t(θ) = min{Q_{t-1}(θ), min_θ' Q_{t-1}(θ') + β} + γ(y_t; θ).
//! [`pwq::PiecewiseQuadFn`] represents each Q_t exactly, [`fpop`] drives the
//! recursion online, and [`loss`] supplies the biweight, Huber, L1, L2 and
//! quantile losses together with default thresholds and penalties.
//!
//! ```
//! use rfpop::{loss::LossSpec, fpop::run};
//!
//! let data = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
//! let (seg, _) = run(&data, &LossSpec::L2, 1.0).unwrap();
//! assert_eq!(seg.changepoints, vec![3]);
//! ```

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cli;
pub mod error;
pub mod fpop;
pub mod loss;
pub mod pwq;
pub mod simbench;

pub use error::{Error, Result};
pub use fpop::{run, OnlineState, Segmentation};
pub use loss::{LossKind, LossSpec};
pub use pwq::PiecewiseQuadFn;
