//! Physical-layer simulator for a UAV swarm acting as a virtual antenna array
//! (VAA) that cooperates with an intelligent reflecting surface (IRS) to serve
//! a ground user while a ground eavesdropper listens.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: positions, direction angles, link trigonometry and the
//!   Gauss-Markov walker that moves the user and the eavesdropper.
//! - [`beamforming`]: array factor, radiated-power quadrature, directive gain
//!   and maximum sidelobe level of the swarm.
//! - [`channel`]: LoS, Rician and Rayleigh channel realizations for all links.
//! - [`irs`]: phase-shift vectors and the closed-form co-phasing policy.
//! - [`link`]: combined gains, Shannon rates and secrecy rate per slot.
//! - [`uav`]: kinematics, rotary-wing propulsion power and flight energy.
//! - [`env`]: the multi-agent environment that binds everything together.
//!
//! Hot loops (quadrature, sidelobe grid search, Monte-Carlo batches) go
//! through [`exec::Exec`], which uses rayon when the `parallel` feature is on
//! and falls back to a plain loop otherwise. Both paths produce bit-identical
//! results.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod env;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod irs;
pub mod link;
pub mod seed;
pub mod uav;

pub use error::{Result, SimError};
pub use exec::Exec;

pub use num_complex::Complex64;
