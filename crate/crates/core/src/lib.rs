//! Exact and numerical computation of the channel simulation divergence and
//! the quantities around it.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: discrete joint channels and the scalar Gaussian channel,
//!   their likelihood ratios, mutual information and singularity diagnostics.
//! - [`width`]: width functions, the channel simulation divergence, the two
//!   routes to the KL divergence and the divergence-gap identity.
//! - [`blocks`]: exact level distributions of i.i.d. product channels, block
//!   divergences, the redundancy curve and the CLT diagnostics.
//! - [`sampler`]: a Poisson functional representation channel simulator and
//!   the measurement of its conditional index entropy.
//! - [`tilting`]: cumulants, tilted measures, typicality events and the
//!   information-ball machinery of the large-deviations converse.
//! - [`acceptance`]: the end-to-end verification criteria, shared by the
//!   acceptance test target and the `verify-all` CLI experiment.
//!
//! All computation happens in nats. Reported quantities (functions whose
//! names or docs say "bits") are converted at the boundary with [`LB_E`].

#![forbid(unsafe_code)]

pub mod acceptance;
pub mod blocks;
pub mod channel;
mod error;
pub mod fixtures;
pub mod numeric;
pub mod sampler;
pub mod tilting;
pub mod width;

pub use error::{Error, Result};

/// `lb e`, the factor converting nats to bits.
pub const LB_E: f64 = std::f64::consts::LOG2_E;

/// Converts a quantity in nats to bits.
#[inline]
pub fn nats_to_bits(nats: f64) -> f64 {
    nats * LB_E
}

/// Converts a quantity in bits to nats.
#[inline]
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * std::f64::consts::LN_2
}
