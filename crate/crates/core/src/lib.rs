//! Deterministic solver and property audits for the spatially homogeneous
//! relativistic Boltzmann equation of Israel particles in a flat FLRW
//! spacetime with positive cosmological constant.

// `!(x > 0.0)` is used on purpose throughout validation so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod cli;
pub mod collision;
pub mod config;
pub mod diagnostics;
pub mod kinematics;
pub mod solver;
pub mod spacetime;

pub use error::{Error, Result};
