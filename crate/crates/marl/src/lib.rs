//! Multi-agent soft actor-critic for the swarmsec environment: hand-written
//! networks and gradients, replay buffer, gravity exploration and the
//! training and evaluation loops.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod buffer;
pub mod error;
pub mod eval;
pub mod gravity;
pub mod nn;
pub mod trainer;

pub use error::{MarlError, Result};
