//! Heat semigroups of higher-order and pseudodifferential generators on the
//! circle and the 2-torus.
//!
//! Every generator is translation invariant, so it is diagonalized by
//! Fourier series and described by its symbol `a(ξ)` with `Re a ≥ 0`. On top
//! of exact spectral kernels the crate provides integration-by-parts checks
//! for augmented semigroups, Legendre transforms and action minimization for
//! rate functions, and small-time large-deviation harnesses.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fourier;
pub mod large_deviations;
pub mod malliavin;
pub mod numerics;
pub mod semigroup;
pub mod spectral;
pub mod varadhan;

pub use error::{Error, Result};
