//! Link-level model of passive, frequency-selective metasurfaces.
//!
//! A metaprism imposes a reflection phase that is linear in frequency, so
//! each OFDM subcarrier leaves the surface toward a different direction (or
//! focal point). This crate holds the numerical core:
//!
//! - [`geometry`]: positions, signed angles, surface grids and band plans.
//! - [`metaprism`]: cell response, steering/focusing/ideal phase synthesis and
//!   LC load realization.
//! - [`environment`]: rough-wall reflection (Fresnel specular plus Lambertian
//!   diffuse) used as the no-metasurface baseline.
//! - [`channel`]: per-cell propagation, the double-sum end-to-end channel,
//!   array factor and path-loss.
//! - [`link`]: noise, SNR, achievable rate and greedy equal-rate assignment.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks

extern crate alloc;

pub mod channel;
pub mod environment;
mod error;
pub mod geometry;
pub mod link;
pub mod metaprism;

pub use error::{Error, Result};
pub use num_complex::Complex64;
