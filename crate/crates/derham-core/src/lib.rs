//! Fourier-Galerkin discretizations of the de Rham complex on the circle and
//! the flat two-torus, together with the Witten-deformed differential
//! `d(t) = d + t df∧` and the associated Laplacians.
//!
//! Every operator is assembled in a real orthonormal Fourier basis, so the
//! adjoint of a matrix is its transpose and the Hodge star is a signed
//! permutation.

pub mod complex;
pub mod duality;
pub mod error;
pub mod fourier;
pub mod trigpoly;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub use complex::{DeRhamComplex, Manifold};
pub use duality::{check_duality_identities, DualityReport};
pub use error::DeRhamError;
pub use trigpoly::{TermSpec, TrigPoly, TrigPolySpec};

/// Scalar type used throughout the workspace.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub type TrigPolyF64 = TrigPoly<f64>;
pub type DeRhamComplexF64 = DeRhamComplex<f64>;
pub type DualityReportF64 = DualityReport<f64>;
