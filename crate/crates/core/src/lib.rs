//! Simulation and drift estimation for the fractional Ornstein–Uhlenbeck
//! process of the second kind, dX_t = −θX_t dt + dY_t with
//! Y_t = ∫₀ᵗ e^{−s} dB_{a_s}, a_t = H e^{t/H}, driven by a fractional
//! Brownian motion B with Hurst index H ∈ (1/2, 1).
//!
//! * [`model`]: Ψ, its inverse, the stationary covariance and σ².
//! * [`simulate`]: exact and approximate path samplers, path CSV I/O.
//! * [`estimate`]: θ̂ for known H, the filter-based Ĥ, and θ̃.
//! * [`mcstudy`]: reproducible Monte Carlo studies.
//! * [`cli`]: the `fou2` command line.
//! * [`numerics`], [`specfun`]: quadrature, roots, Cholesky, RNG streams,
//!   KS test, gamma/beta/digamma.

pub mod cli;
pub mod error;
pub mod estimate;
pub mod json;
pub mod mcstudy;
pub mod model;
pub mod numerics;
pub mod simulate;
pub mod specfun;

pub use error::{Error, Result};
