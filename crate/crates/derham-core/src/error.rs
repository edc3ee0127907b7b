use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeRhamError {
    #[error("mode cutoff {cutoff} is below the required minimum {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },
    #[error("degree {q} is out of range for a manifold of dimension {n}")]
    DegreeOutOfRange { q: usize, n: usize },
    #[error("function has arity {got}, manifold needs {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("complexes have different cutoffs ({0} vs {1})")]
    CutoffMismatch(usize, usize),
    #[error("complexes live on different manifolds")]
    ManifoldMismatch,
}
