use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorsionError {
    #[error("degree {q}: d^(q+1) d^q has residual {residual:e}")]
    NotAComplex { q: usize, residual: f64 },
    #[error("degree {q}: Gram matrix is not positive definite")]
    NotSpd { q: usize },
    #[error("degree {q}: shape mismatch ({detail})")]
    Shape { q: usize, detail: String },
    #[error("expected nullity {expected} but the spectral gap ratio is only {ratio:.3e}")]
    NullityMismatch { expected: usize, ratio: f64 },
    #[error("degree {q}: map is singular")]
    Singular { q: usize },
    #[error("not a chain map: residual {0:e}")]
    NotChainMap(f64),
    #[error("degree {q}: induced map on cohomology is rank deficient")]
    RankDeficient { q: usize },
    #[error("degree {q}: a virtually small eigenvalue at t = 0 is not positive ({value:e})")]
    VsVanishes { q: usize, value: f64 },
    #[error("a(0) = {0:e} is not usable")]
    BadA(f64),
}
