//! Geometry of fermionic Gaussian states.
//!
//! Covariance matrices of Gaussian states, steady states of quadratic
//! Lindblad generators, the quantum geometric tensor with its Bures metric
//! and mean Uhlmann curvature, translationally invariant chains in momentum
//! space, and a dense small-Hilbert-space oracle that everything above is
//! checked against.
//!
//! Majorana convention used everywhere: `w[2j] = c_j + c_j^†` and
//! `w[2j+1] = i(c_j - c_j^†)` (zero-based), with the Jordan-Wigner string
//! `c_l = (Π_{m<l} σ^z_m)(σ^x_l + iσ^y_l)/2`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod liouvillian;
pub mod models;
pub mod momentum;
pub mod numerics;
pub mod oracle;
pub mod random;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
