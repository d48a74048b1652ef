//! Numerical engines for two-photon interference experiments.
//!
//! The crate models an energy-anticorrelated photon pair on a discrete
//! detuning grid and drives it through four experiments:
//!
//! * Hong-Ou-Mandel dips, sample delays and dispersion cancellation ([`hom`]),
//! * the polarization quantum eraser ([`eraser`]),
//! * Franson two-interferometer fringes and the CHSH parameter ([`franson`]),
//! * tunneling times through a multilayer dielectric mirror ([`barrier`]).
//!
//! All quantities are SI internally (metres, seconds, rad/s).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod eraser;
mod error;
pub mod fit;
pub mod franson;
pub mod hom;
pub mod materials;
pub mod optics;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a vacuum wavelength (m) to angular frequency (rad/s).
#[inline]
pub fn wavelength_to_angular(wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}

/// Converts an angular frequency (rad/s) to vacuum wavelength (m).
#[inline]
pub fn angular_to_wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}
