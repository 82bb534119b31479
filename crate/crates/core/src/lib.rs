//! Hierarchical neuro-fuzzy control for a planar biped.
//!
//! The crate is organized bottom-up:
//!
//! - [`fuzzy`]: first-order Takagi-Sugeno inference (Gaussian MFs,
//!   product t-norm, normalized weighted-average defuzzification).
//! - [`train`]: hybrid learning for those systems — ridge least squares
//!   for consequents, full-batch gradient descent for premises.
//! - [`biped`]: planar two-link leg kinematics and gait dataset
//!   synthesis; the geometric oracle the controllers learn from.
//! - [`hierarchy`]: the six-controller cascade that maps a desired
//!   center-of-mass position to joint angles for both legs, plus the
//!   chain evaluator and closed-loop walk driver.
//! - [`study`]: the training-set-size sweep and its exports.
//! - [`persist`]: JSON model files and CSV dataset/log formats.
//! - [`config`]: flat `key=value` run configuration.
//!
//! All numerics are `f64`, all randomness flows from explicit seeds, and
//! evaluation is pure, so every artifact the binary writes is
//! reproducible byte for byte.

pub mod biped;
pub mod config;
pub mod error;
pub mod fuzzy;
pub mod hierarchy;
pub mod persist;
pub mod study;
pub mod train;

pub use error::{Error, Result};
