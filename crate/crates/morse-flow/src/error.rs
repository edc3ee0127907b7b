use derham_core::DeRhamError;
use spectral_branches::SpectralError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorseError {
    #[error("f is not Morse: degenerate critical point at {coords:?} (smallest |Hessian eigenvalue| {min_eig:e})")]
    NonMorse { coords: Vec<f64>, min_eig: f64 },
    #[error("f is constant on a factor, so its critical set is not isolated")]
    ConstantFactor,
    #[error("critical counts {counts:?} give Euler characteristic {found}, expected {expected}; roots were missed")]
    EulerMismatch { counts: Vec<usize>, found: i64, expected: i64 },
    #[error("unsupported flow: {0}")]
    Unsupported(String),
    #[error("quadrature did not converge within {panels} panels")]
    Quadrature { panels: usize },
    #[error("Morse complex degree {q}: cohomology rank {rank}, expected Betti number {beta}")]
    RankMismatch { q: usize, rank: usize, beta: usize },
    #[error("no branch sample at t = {0}")]
    MissingSample(f64),
    #[error("package branch {0} has no critical-point assignment")]
    MissingAssignment(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Core(#[from] DeRhamError),
}
