//! Numerical toolkit for width asymptotics of weighted Sobolev classes on
//! domains with an outward cusp.
//!
//! The crate is `no_std` with `alloc`. File formats, the command line and
//! thread pools live in the `peakwidths-cli` crate.
//!
//! Module map:
//!
//! * [`params`]: problem tuple, power-log weights, cusp profile, derived exponents.
//! * [`exponents`]: predicted width orders and the finite-dimensional ball orders.
//! * [`hardy`]: two-weight Hardy constants and a discretized operator norm.
//! * [`partition`]: multiscale grids of the upper-bound construction with overlap certificates.
//! * [`ballwidths`]: desk-scale Kolmogorov and Gelfand widths of finite-dimensional balls.
//! * [`cusp`]: cusp meshes, local polynomial projections, bump families, decay experiments.
//! * [`regression`]: log-log slope fitting.
#![no_std]
// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod ballwidths;
pub mod cusp;
pub mod exponents;
pub mod hardy;
pub mod optimize;
pub mod params;
pub mod partition;
pub mod quad;
pub mod regression;

pub use error::{Error, Result};
