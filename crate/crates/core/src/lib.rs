//! Symmetric-capacity analysis for the i.i.d. Rayleigh-fading multiple-access
//! channel.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! - [`linalg`] and [`sampling`]: small dense complex-matrix kernels and the
//!   seeded samplers (complex Gaussian, Haar unitary, conditioned sphere).
//! - [`mac`]: per-subset mutual information, sum and symmetric capacity.
//! - [`special`] and [`bounds`]: the incomplete beta function and the
//!   closed-form conditional outage CDFs and bounds built on it.
//! - [`dmt`]: diversity-multiplexing tradeoff curves.
//! - [`monte_carlo`]: empirical conditional CDFs and outage-vs-SNR sweeps.
//! - [`lattice`] and [`integer_forcing`]: LLL / exhaustive integer-matrix
//!   search and the IF / IF-SIC achievable rates with space-time precoding.
//!
//! All rates are in bits (base-2 logarithms). Enable the `parallel` feature
//! to spread Monte-Carlo trials over a rayon pool; results are bit-identical
//! to the sequential schedule.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style guards are used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod dmt;
mod error;
pub mod integer_forcing;
pub mod lattice;
pub mod linalg;
pub mod mac;
mod math;
pub mod monte_carlo;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use mac::MacChannel;
pub use sampling::RngStream;
