use nalgebra::DMatrix;
use serde::Serialize;

use crate::complex::DeRhamComplex;
use crate::error::DeRhamError;
use crate::Real;

/// Max-norm residuals of the four Hodge-star identities at one `(q, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport<T> {
    /// `⋆^{n-q} ⋆^q - (-1)^{q(n-q)} Id`.
    pub star_square: T,
    /// `(-1)^{q(n-q)} ⋆^q Δ^q ⋆^{n-q} - Δ^{n-q}` for the undeformed Laplacian.
    pub flat_conjugation: T,
    /// `(-1)^{q(n-q)} ⋆^q Δ^q_f(t) ⋆^{n-q} - Δ^{n-q}_{-f}(t)`.
    pub witten_conjugation: T,
    /// `Δ^q_f(-t) - Δ^q_{-f}(t)`.
    pub reflection: T,
}

impl<T: Real> DualityReport<T> {
    pub fn max(&self) -> T {
        self.star_square.max(self.flat_conjugation).max(self.witten_conjugation).max(self.reflection)
    }
}

fn sign<T: Real>(q: usize, n: usize) -> T {
    if (q * (n - q)).is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

fn amax<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// Evaluates the star identities for the complexes of `f` and `-f`.
pub fn check_duality_identities<T: Real>(
    c: &DeRhamComplex<T>,
    c_neg: &DeRhamComplex<T>,
    q: usize,
    t: T,
) -> Result<DualityReport<T>, DeRhamError> {
    if c.manifold() != c_neg.manifold() {
        return Err(DeRhamError::ManifoldMismatch);
    }
    if c.cutoff() != c_neg.cutoff() {
        return Err(DeRhamError::CutoffMismatch(c.cutoff(), c_neg.cutoff()));
    }
    let n = c.n();
    if q > n {
        return Err(DeRhamError::DegreeOutOfRange { q, n });
    }
    let p = n - q;
    let s: T = sign(q, n);
    let sq = c.hodge_star(q)?;
    let sp = c.hodge_star(p)?;

    let id = DMatrix::<T>::identity(c.dims()[q], c.dims()[q]);
    let star_square = amax(&(sp * sq - id * s));

    let zero = T::zero();
    let flat = c.witten_laplacian(q, zero)?;
    let flat_conjugation = amax(&((sq * flat * sp) * s - c.witten_laplacian(p, zero)?));

    let witten_conjugation = amax(&((sq * c.witten_laplacian(q, t)? * sp) * s - c_neg.witten_laplacian(p, t)?));
    let reflection = amax(&(c.witten_laplacian(q, -t)? - c_neg.witten_laplacian(q, t)?));

    Ok(DualityReport { star_square, flat_conjugation, witten_conjugation, reflection })
}
