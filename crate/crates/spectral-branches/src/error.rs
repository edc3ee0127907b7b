use derham_core::DeRhamError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (relative residual {0:e})")]
    NonSymmetric(f64),
    #[error("dense eigensolver failed to converge")]
    EigenFailure,
    #[error("grid must be strictly increasing, start at 0 and have at least two points")]
    InvalidGrid,
    #[error("requested {k} branches but the space has dimension {dim}")]
    TooManyBranches { k: usize, dim: usize },
    #[error("branch matching unresolvable on [{t_from}, {t_to}]: minimum overlap {overlap:.3e}")]
    Unresolvable { t_from: f64, t_to: f64, overlap: f64 },
    #[error(
        "no spectral gap in degree {q} at T_max = {t_max}: {reason}; raise T_max (or the mode cutoff)"
    )]
    GapNotFound { q: usize, t_max: f64, reason: String },
    #[error("degree {q}: found {found} identically-zero branches, expected {expected}")]
    ZeroCountMismatch { q: usize, expected: usize, found: usize },
    #[error("degree {q}: no Morse data (c_q = {c}, beta_q = {beta})")]
    NoMorseData { q: usize, c: usize, beta: usize },
    #[error("degree {q}: {have} tracked branches cannot hold c_q = {c}")]
    TooFewBranches { q: usize, c: usize, have: usize },
    #[error("degree {q}: {sites} sites of index {q} but c_q = {c}")]
    SiteCountMismatch { q: usize, sites: usize, c: usize },
    #[error(transparent)]
    Core(#[from] DeRhamError),
}
