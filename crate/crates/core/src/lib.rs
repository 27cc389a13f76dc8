//! Intention-conditioned trajectory prediction with cost-based ranking,
//! max-margin weight tuning, offboard annotation and evaluation.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotation;
pub mod autotune;
pub mod cli;
pub mod costing;
pub mod error;
pub mod evaluation;
pub mod generation;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod scene;

pub use error::{Error, Result};
