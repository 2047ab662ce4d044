//! Fractional quantum state transfer across waveguide-coupled qubit networks.
//!
//! The crate synthesizes the shaped controls that emit a chosen fraction of a
//! qubit excitation as a travelling photon, integrates the single-excitation
//! dynamics of linear and star networks, adds quasistatic dephasing and
//! relaxation, and scores the resulting W states.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoherence;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod network;
pub mod ode;
pub mod planner;
pub mod runner;
pub mod pulse;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
