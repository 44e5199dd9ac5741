//! Weighted null controls for the singular Rayleigh beam
//! `y_tt + ε y_xxxx − y_xx = 0` with a Neumann control at `x = 1`, and the
//! wave-equation cascade `v⁰, v¹, v²` describing `√ε v^ε` as `ε → 0`.
//!
//! Module map:
//!
//! * [`signals`]: time grids, sampled signals, the weight `η`, norms, rate fits.
//! * [`wave`]: Courant-one leapfrog solver with Dirichlet data and sources.
//! * [`wave_hum`]: minimal weighted Dirichlet control of the wave equation.
//! * [`beam`]: cubic Hermite elements and Newmark stepping for the beam.
//! * [`beam_hum`]: minimal weighted Neumann control of the beam.
//! * [`cascade`]: `v⁰, v¹, v²`, composite approximations and rate diagnostics.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod beam;
pub mod beam_hum;
pub mod cascade;
mod cg;
pub mod error;
pub mod signals;
pub mod wave;
pub mod wave_hum;

pub use cg::{CgOutcome, CgSettings};
pub use error::{Error, Result};

/// Initial position `sin⁴(2πx)` used throughout the experiments.
pub fn sin4(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sin().powi(4)
}

/// First derivative of [`sin4`].
pub fn sin4_dx(x: f64) -> f64 {
    let a = 2.0 * std::f64::consts::PI;
    let s = (a * x).sin();
    4.0 * a * s.powi(3) * (a * x).cos()
}
