//! Numerical convex analysis for functional Santaló / Mahler type
//! inequalities.
//!
//! The crate is organized bottom-up:
//!
//! - [`convex`]: grid functions, linear-time Legendre transforms, infimal
//!   convolution and Moreau–Yosida regularization.
//! - [`measures`]: log-concave measures built from potentials, their
//!   entropy, quantiles, moment measures and isoperimetric profiles.
//! - [`transport`]: the maximal-correlation cost, exactly in 1D through the
//!   monotone coupling and by an exact discrete solver in any dimension.
//! - [`inequalities`]: verifiers that evaluate each identity or inequality
//!   and return a [`inequalities::VerificationReport`].
//! - [`families`]: named potentials and profiles used by tests and the CLI.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convex;
pub mod error;
pub mod families;
pub mod inequalities;
pub mod measures;
pub mod quadrature;
pub mod transport;

pub use error::{Error, Result};
