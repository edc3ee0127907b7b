//! Analytic torsion of finite-dimensional cochain complexes.
//!
//! [`FiniteComplex`] carries differentials and Gram matrices, from which the
//! Laplacians, `det′`, and the torsion `T(C) = ∏ (det′ Δ^q)^{½ q (−1)^{q+1}}`
//! follow. [`ComplexMorphism`] adds the volumes `Vol(φ)` and `Vol(H(φ))`
//! entering the anomaly formula `T(C₂)/T(C₁) = Vol(H(φ))/Vol(φ)`.

pub mod complex;
pub mod error;
pub mod lattice;
pub mod random;
pub mod theorem;
pub mod volumes;

pub use complex::{
    check_anomaly, det_prime, log_cohomology_volumes, log_det_prime, log_det_prime_laplacians, log_torsion, log_vol,
    log_vol_of_iso, torsion_t, AnomalyCheck, ComplexMorphism, FiniteComplex,
};
pub use error::TorsionError;
pub use lattice::{cohomology_log_covolumes, image_basis, integer_kernel, invariant_factors, log_covolume};
pub use random::{anomaly_case, random_complex, random_isomorphism, RandomOptions};
pub use theorem::{composite_check, evaluate_theorem, CompositeCheck, DegreeTerm, SignedLog, TorsionReport};
pub use volumes::{harmonic_volumes, period_matrix, HarmonicVolumes};
