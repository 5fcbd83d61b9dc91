//! Deterministic simulation of DASH-style adaptive video streaming over
//! time-varying channels, with six bitrate adaptation algorithms and a QoE
//! evaluation harness.

// `!(x > 0.0)` is used throughout so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abr;
pub mod batch;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod export;
pub mod manifest;
pub mod metrics;

pub use error::{Error, Result};
