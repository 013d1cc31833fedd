//! Special functions: Gamma, Bessel J/Y/I/K of real order, n-dimensional
//! Legendre polynomials.

mod bessel;
mod gamma;
pub mod halfint;
mod legendre;

pub use bessel::{bessel_i, bessel_ik, bessel_j, bessel_jy, bessel_k, bessel_y};
pub use gamma::{gamma, gamma_ratio, ln_gamma};
pub use legendre::{harmonic_dimension, legendre};

pub(crate) use bessel::j_unchecked;
pub(crate) use legendre::legendre_unchecked;

use crate::error::{domain, Result};

/// A non-negative Bessel order ν.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Order(f64);

impl Order {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(domain(format!("Bessel order must be finite and non-negative, got {nu}")));
        }
        Ok(Self(nu))
    }

    /// ν(k) = k + (n-2)/2, the order attached to degree-k harmonics in R^n.
    pub fn for_harmonic(n: usize, k: usize) -> Self {
        Self(k as f64 + (n as f64 - 2.0) / 2.0)
    }

    pub fn nu(self) -> f64 {
        self.0
    }
}
