//! Differentiable ray-traced SAR intensity simulation.
//!
//! A scene is a triangle mesh with per-vertex surface parameters
//! `(h, l, eps_r, tau)`. [`imaging::render`] traces a side-looking ray fan along
//! the platform trajectory, evaluates the double-scale backscatter model at
//! every hit and bins the intensities by range into an azimuth x range image.
//! [`learn`] closes the loop: it back-propagates an image loss through the
//! recorded hits to per-vertex parameter gradients and runs projected Adam.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod accel;
pub mod config;
pub mod error;
pub mod exec;
pub mod imaging;
pub mod learn;
pub mod scatter;
pub mod scene;

pub use error::{Error, Result};
pub use exec::Execution;
