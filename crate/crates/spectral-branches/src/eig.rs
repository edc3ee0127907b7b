use derham_core::{lit, Real};
use nalgebra::DMatrix;

use crate::error::SpectralError;

/// Scalars with a dense symmetric eigensolver.
pub trait EigenScalar: Real {
    /// All eigenpairs of a symmetric matrix, eigenvalues ascending.
    fn sym_eigen(a: &DMatrix<Self>) -> Option<(Vec<Self>, DMatrix<Self>)>;
}

macro_rules! faer_eigen {
    ($t:ty) => {
        impl EigenScalar for $t {
            fn sym_eigen(a: &DMatrix<$t>) -> Option<(Vec<$t>, DMatrix<$t>)> {
                let n = a.nrows();
                if n == 0 {
                    return Some((Vec::new(), DMatrix::zeros(0, 0)));
                }
                let m = faer::Mat::<$t>::from_fn(n, n, |i, j| a[(i, j)]);
                let e = m.self_adjoint_eigen(faer::Side::Lower).ok()?;
                let s = e.S();
                let u = e.U();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
                let vals = order.iter().map(|&i| s[i]).collect();
                let vecs = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
                Some((vals, vecs))
            }
        }
    };
}

faer_eigen!(f64);
faer_eigen!(f32);

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs<T: Real> {
    pub values: Vec<T>,
    pub vectors: DMatrix<T>,
}

impl<T: Real> EigenPairs<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keeps the first `k` pairs.
    pub fn truncate(mut self, k: usize) -> Self {
        let k = k.min(self.values.len());
        self.values.truncate(k);
        self.vectors = self.vectors.columns(0, k).into_owned();
        self
    }
}

/// Max-norm of `A - Aᵀ` relative to `1 + max|A|`.
pub fn symmetry_residual<T: Real>(a: &DMatrix<T>) -> T {
    let scale = T::one() + a.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let mut r = T::zero();
    for j in 0..a.ncols() {
        for i in 0..j {
            r = r.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    r / scale
}

/// Eigenpairs of a symmetric matrix, ascending, optionally only the lowest `k`.
pub fn eig_sym<T: EigenScalar>(a: &DMatrix<T>, k: Option<usize>) -> Result<EigenPairs<T>, SpectralError> {
    if a.nrows() != a.ncols() {
        return Err(SpectralError::NotSquare(a.nrows(), a.ncols()));
    }
    let res = symmetry_residual(a);
    let tol = if std::mem::size_of::<T>() == 4 { lit::<T>(1e-5) } else { lit::<T>(1e-10) };
    if res > tol {
        return Err(SpectralError::NonSymmetric(derham_core::to_f64(res)));
    }
    let (values, vectors) = T::sym_eigen(a).ok_or(SpectralError::EigenFailure)?;
    let pairs = EigenPairs { values, vectors };
    Ok(match k {
        Some(k) => pairs.truncate(k),
        None => pairs,
    })
}
