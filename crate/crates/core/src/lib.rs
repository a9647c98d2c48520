//! Numerical machinery for growth spaces of harmonic functions on the unit ball
//! of `R^{N+1}`.
//!
//! The crate is organised bottom-up:
//!
//! - [`seqcalc`]: difference operators, Cesàro numbers and summation by parts.
//! - [`weights`]: doubling weights, block sequences, regularity and the integral
//!   regularization of a weight.
//! - [`quadrature`]: Gauss rules and adaptive integration used by the rest.
//! - [`kernels`]: zonal harmonics, Cesàro kernels, cutoff profiles and the
//!   de la Vallée-Poussin type kernels, with L¹ norms on the sphere.
//! - [`expansions`]: finite spherical-harmonic expansions and radial L^p profiles.
//! - [`diagnostics`]: growth-space membership reports.
//! - [`multipliers`]: coefficient multiplier operators and their checks.

pub mod diagnostics;
mod error;
pub mod expansions;
pub mod kernels;
pub mod multipliers;
pub mod quadrature;
pub mod seqcalc;
pub mod weights;

pub use error::{Error, Result};
