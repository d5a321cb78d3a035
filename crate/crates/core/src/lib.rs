//! Numerical laboratory for the periodic axisymmetric surface diffusion flow.
//!
//! A surface of revolution `{(x, r(x) cos θ, r(x) sin θ)}` with `2π`-periodic
//! profile `r > 0` moves by `r_t = G(r)`, where `G` is the divergence form of
//! the surface Laplacian of mean curvature. The crate provides a Fourier
//! discretization of `G`, the cylinder and unduloid equilibria, a stabilized
//! time integrator and linear stability tools.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod reduced;
pub mod svg;

pub use error::{Error, Result};
pub use grid::{PeriodicProfile, SpectralCoeffs, TorusGrid};
