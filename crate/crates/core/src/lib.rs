//! Nonparametric tests of whether one distribution is a parametric
//! transformation of another (or of several others).
//!
//! The null hypothesis is `F(x) = G(g(x, θ))` for some `θ` in a compact box,
//! with `g` increasing in `x` (location, scale, location-scale, or a
//! user-supplied family). The statistic is the minimum over `θ` of the
//! `L²(ν)` distance between the empirical CDFs, scaled by the effective sample
//! size. Its null distribution is approximated by a numerical bootstrap: the
//! finite-difference second derivative of the minimum-distance map, evaluated
//! in bootstrap directions.
//!
//! Modules, bottom up:
//!
//! - [`samples`]: validated samples, empirical CDFs, resampling.
//! - [`rng`]: counter-keyed random streams, so every result is a pure
//!   function of the seed regardless of thread count.
//! - [`transforms`]: transformation families and parameter boxes.
//! - [`criterion`]: quadrature against `ν`, the distance objective and its
//!   lattice minimizer.
//! - [`hypothesis`]: the two-sample and K-sample tests.
//! - [`simulation`]: data generating processes and warp-speed Monte Carlo
//!   rejection-rate studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod criterion;
mod error;
pub mod hypothesis;
pub mod rng;
pub mod samples;
pub mod simulation;
pub mod transforms;

pub use error::{Error, Result};
