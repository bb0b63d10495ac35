//! Reliability exponents of the additive white Gaussian noise channel.
//!
//! The crate computes the sphere-packing error exponent and the
//! correct-decoding exponent of the power-constrained AWGN channel, audits
//! lattice method-of-types counting bounds by exhaustive enumeration, checks
//! the quantization bridges between densities and types, and simulates
//! maximum-likelihood decoding of random codebooks.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exponents;
pub mod gauss_family;
pub mod numeric;
pub mod quantization_bridge;
pub mod simulator;
pub mod type_system;

pub use error::{Error, Result};
pub use exponents::{ExponentKind, ExponentPoint};
pub use gauss_family::{ChannelSpec, RhoPoint};
