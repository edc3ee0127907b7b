//! Morse-theoretic side of the Witten deformation for flows with
//! closed-form trajectories.
//!
//! [`find_critical_points`] locates `Cr(f)`, [`ProductFlow`] builds the
//! unstable cells `W⁻_x` and connecting trajectories, [`morse_coboundary`]
//! assembles the Morse cochain complex and [`int_matrix`] / [`a_report`]
//! evaluate the integration map `Int*(t)` and the determinants `a^q(t)`.

pub mod cells;
pub mod coboundary;
pub mod critical;
pub mod error;
pub mod integrals;
pub mod quadrature;

pub use cells::{
    certify, certify_flow, check_morse_smale, unstable_cells, CircleFlow, Connection, MorseSmaleCertificate,
    ProductFlow, Segment, UnstableCell,
};
pub use coboundary::{integer_rank, morse_coboundary, MorseComplexData};
pub use critical::{counts, find_critical_points, sites, CriticalOptions, CriticalPoint};
pub use error::MorseError;
pub use integrals::{a_matrix, a_report, determinant, int_matrix, integral_a, package_basis, ADeterminant, AReport};
pub use quadrature::Quadrature;
