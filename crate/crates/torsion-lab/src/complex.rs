//! Finite cochain complexes with inner products, their torsion, and the
//! volumes of chain isomorphisms.
//!
//! Everything is computed in orthonormal coordinates: with `G = L Lᵀ` the
//! Cholesky factor of a Gram matrix, `x̃ = Lᵀ x` is an isometry onto
//! Euclidean space, so adjoints become transposes. All products of positive
//! quantities are accumulated as logarithms.

use derham_core::{lit, to_f64, Real};
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::TorsionError;

#[derive(Debug, Clone)]
pub struct FiniteComplex<T: Real> {
    dims: Vec<usize>,
    d: Vec<DMatrix<T>>,
    gram: Vec<DMatrix<T>>,
    /// Upper Cholesky factors `Lᵀ`.
    chol_t: Vec<DMatrix<T>>,
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

impl<T: Real> FiniteComplex<T> {
    /// `d[q]` maps degree `q` to `q+1`; `gram[q]` is the inner product on degree `q`.
    pub fn new(d: Vec<DMatrix<T>>, gram: Vec<DMatrix<T>>) -> Result<Self, TorsionError> {
        let dims: Vec<usize> = gram.iter().map(|g| g.nrows()).collect();
        if d.len() + 1 != dims.len() {
            return Err(TorsionError::Shape { q: 0, detail: format!("{} differentials for {} degrees", d.len(), dims.len()) });
        }
        for (q, m) in d.iter().enumerate() {
            if m.shape() != (dims[q + 1], dims[q]) {
                return Err(TorsionError::Shape {
                    q,
                    detail: format!("d is {:?}, expected {:?}", m.shape(), (dims[q + 1], dims[q])),
                });
            }
        }
        for q in 0..d.len().saturating_sub(1) {
            let dd = &d[q + 1] * &d[q];
            let scale = T::one() + max_abs(&d[q + 1]) * max_abs(&d[q]);
            let r = max_abs(&dd) / scale;
            if r > lit(1e-12) {
                return Err(TorsionError::NotAComplex { q, residual: to_f64(r) });
            }
        }
        let mut chol_t = Vec::with_capacity(gram.len());
        for (q, g) in gram.iter().enumerate() {
            if g.nrows() != g.ncols() {
                return Err(TorsionError::Shape { q, detail: "Gram matrix not square".into() });
            }
            let sym = (g + g.transpose()) * lit::<T>(0.5);
            let c = sym.cholesky().ok_or(TorsionError::NotSpd { q })?;
            chol_t.push(c.l().transpose());
        }
        Ok(Self { dims, d, gram, chol_t })
    }

    /// Complex with the standard inner product in every degree.
    pub fn orthonormal(d: Vec<DMatrix<T>>) -> Result<Self, TorsionError> {
        let mut dims: Vec<usize> = d.iter().map(|m| m.ncols()).collect();
        dims.push(d.last().map(|m| m.nrows()).unwrap_or(0));
        Self::new(d, dims.iter().map(|&n| DMatrix::identity(n, n)).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn d(&self, q: usize) -> &DMatrix<T> {
        &self.d[q]
    }

    pub fn gram(&self, q: usize) -> &DMatrix<T> {
        &self.gram[q]
    }

    /// Coordinates in which degree `q` is Euclidean: `x ↦ Lᵀ x`.
    pub fn to_orthonormal(&self, q: usize) -> &DMatrix<T> {
        &self.chol_t[q]
    }

    fn inv_chol_t(&self, q: usize) -> DMatrix<T> {
        self.chol_t[q].clone().try_inverse().expect("Cholesky factor is invertible")
    }

    /// `d̃^q = L_{q+1}ᵀ d^q L_q^{−T}`.
    pub fn d_orthonormal(&self, q: usize) -> DMatrix<T> {
        &self.chol_t[q + 1] * &self.d[q] * self.inv_chol_t(q)
    }

    /// Laplacian `δd + dδ` of degree `q` in orthonormal coordinates.
    pub fn laplacian(&self, q: usize) -> DMatrix<T> {
        let n = self.dims[q];
        let mut l = DMatrix::zeros(n, n);
        if q < self.top() {
            let d = self.d_orthonormal(q);
            l += d.transpose() * d;
        }
        if q > 0 {
            let d = self.d_orthonormal(q - 1);
            l += &d * d.transpose();
        }
        (&l + l.transpose()) * lit::<T>(0.5)
    }

    /// Numerical rank of `d^q` (relative tolerance on singular values).
    pub fn rank(&self, q: usize) -> usize {
        if q >= self.top() || self.dims[q] == 0 || self.dims[q + 1] == 0 {
            return 0;
        }
        let sv = self.d_orthonormal(q).singular_values();
        let smax = sv.iter().fold(T::zero(), |a, &x| a.max(x));
        let tol = smax * lit::<T>(1e-10);
        sv.iter().filter(|&&s| s > tol).count()
    }

    /// Cohomology dimensions `dim C^q − rank d^q − rank d^{q−1}`.
    pub fn betti(&self) -> Vec<usize> {
        (0..=self.top())
            .map(|q| self.dims[q] - self.rank(q) - if q > 0 { self.rank(q - 1) } else { 0 })
            .collect()
    }

    /// Orthonormal basis of harmonic cochains of degree `q`, in orthonormal coordinates.
    pub fn harmonic_basis(&self, q: usize) -> DMatrix<T> {
        let beta = self.betti()[q];
        let eig = SymmetricEigen::new(self.laplacian(q));
        let mut order: Vec<usize> = (0..self.dims[q]).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        DMatrix::from_fn(self.dims[q], beta, |r, c| eig.eigenvectors[(r, order[c])])
    }

    /// Block-diagonal direct sum, degree by degree.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, TorsionError> {
        let block = |a: &DMatrix<T>, b: &DMatrix<T>| {
            let mut m = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
            m.view_mut((0, 0), a.shape()).copy_from(a);
            m.view_mut(a.shape(), b.shape()).copy_from(b);
            m
        };
        Self::new(
            self.d.iter().zip(&other.d).map(|(a, b)| block(a, b)).collect(),
            self.gram.iter().zip(&other.gram).map(|(a, b)| block(a, b)).collect(),
        )
    }
}

/// `log det′ A`: the sum of the logs of all but the `nullity` smallest
/// eigenvalues of a symmetric PSD matrix. The kept eigenvalues must exceed
/// the discarded ones by a factor of at least `10³`.
pub fn log_det_prime<T: Real>(a: &DMatrix<T>, nullity: usize) -> Result<f64, TorsionError> {
    let n = a.nrows();
    if nullity > n {
        return Err(TorsionError::NullityMismatch { expected: nullity, ratio: 0.0 });
    }
    let sym = (a + a.transpose()) * lit::<T>(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().map(|&x| to_f64(x)).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if nullity < n {
        let kept = ev[nullity];
        let floor = if nullity > 0 { ev[nullity - 1].abs() } else { 0.0 };
        let scale = ev.last().copied().unwrap_or(0.0).abs().max(1.0);
        let ratio = if floor > 0.0 { kept / floor } else { f64::INFINITY };
        if kept <= 1e-14 * scale || ratio < 1e3 {
            return Err(TorsionError::NullityMismatch { expected: nullity, ratio });
        }
    }
    Ok(ev[nullity..].iter().map(|x| x.ln()).sum())
}

/// `det′ A` (see [`log_det_prime`]).
pub fn det_prime<T: Real>(a: &DMatrix<T>, nullity: usize) -> Result<f64, TorsionError> {
    log_det_prime(a, nullity).map(f64::exp)
}

/// Per-degree `log det′ Δ^q`.
pub fn log_det_prime_laplacians<T: Real>(c: &FiniteComplex<T>) -> Result<Vec<f64>, TorsionError> {
    let betti = c.betti();
    (0..=c.top()).map(|q| log_det_prime(&c.laplacian(q), betti[q])).collect()
}

/// `log T(C) = Σ_q ½ q (−1)^{q+1} log det′ Δ^q`.
pub fn log_torsion<T: Real>(c: &FiniteComplex<T>) -> Result<f64, TorsionError> {
    let ld = log_det_prime_laplacians(c)?;
    Ok(ld.iter().enumerate().map(|(q, &l)| 0.5 * q as f64 * sign(q + 1) * l).sum())
}

/// `T(C)`.
pub fn torsion_t<T: Real>(c: &FiniteComplex<T>) -> Result<f64, TorsionError> {
    log_torsion(c).map(f64::exp)
}

pub(crate) fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) { 1.0 } else { -1.0 }
}

/// `log vol(φ) = ½ log det(φ^♯ φ)` with `φ^♯ = G_src^{−1} φᵀ G_tgt`.
pub fn log_vol<T: Real>(phi: &DMatrix<T>, gram_src: &DMatrix<T>, gram_tgt: &DMatrix<T>, q: usize) -> Result<f64, TorsionError> {
    if phi.nrows() != phi.ncols() || phi.nrows() != gram_tgt.nrows() || phi.ncols() != gram_src.nrows() {
        return Err(TorsionError::Shape { q, detail: "map is not square or does not match the Gram matrices".into() });
    }
    if phi.nrows() == 0 {
        return Ok(0.0);
    }
    let rhs = phi.transpose() * gram_tgt * phi;
    let normal = gram_src.clone().lu().solve(&rhs).ok_or(TorsionError::Singular { q })?;
    let det = to_f64(normal.determinant());
    if !(det > 0.0) || !det.is_finite() {
        return Err(TorsionError::Singular { q });
    }
    Ok(0.5 * det.ln())
}

/// A degree-wise map between two complexes commuting with the differentials.
#[derive(Debug, Clone)]
pub struct ComplexMorphism<T: Real> {
    pub source: FiniteComplex<T>,
    pub target: FiniteComplex<T>,
    pub maps: Vec<DMatrix<T>>,
}

impl<T: Real> ComplexMorphism<T> {
    /// Validates the chain-map identity to relative tolerance `1e−10`.
    pub fn new(source: FiniteComplex<T>, target: FiniteComplex<T>, maps: Vec<DMatrix<T>>) -> Result<Self, TorsionError> {
        Self::with_tolerance(source, target, maps, 1e-10)
    }

    pub fn with_tolerance(
        source: FiniteComplex<T>,
        target: FiniteComplex<T>,
        maps: Vec<DMatrix<T>>,
        tol: f64,
    ) -> Result<Self, TorsionError> {
        if maps.len() != source.dims().len() || source.dims().len() != target.dims().len() {
            return Err(TorsionError::Shape { q: 0, detail: "degree ranges differ".into() });
        }
        for (q, m) in maps.iter().enumerate() {
            if m.shape() != (target.dims()[q], source.dims()[q]) {
                return Err(TorsionError::Shape { q, detail: format!("map is {:?}", m.shape()) });
            }
        }
        let r = chain_residual(&source, &target, &maps);
        if r > tol {
            return Err(TorsionError::NotChainMap(r));
        }
        Ok(Self { source, target, maps })
    }

    pub fn chain_residual(&self) -> f64 {
        chain_residual(&self.source, &self.target, &self.maps)
    }
}

fn chain_residual<T: Real>(s: &FiniteComplex<T>, t: &FiniteComplex<T>, maps: &[DMatrix<T>]) -> f64 {
    let mut r: f64 = 0.0;
    for q in 0..s.top() {
        let lhs = &maps[q + 1] * s.d(q);
        let rhs = t.d(q) * &maps[q];
        let scale = 1.0 + to_f64(max_abs(&lhs).max(max_abs(&rhs)));
        r = r.max(to_f64(max_abs(&(lhs - rhs))) / scale);
    }
    r
}

/// Per-degree `log vol(φ^q)` and `log Vol(φ) = Σ (−1)^q log vol(φ^q)`.
pub fn log_vol_of_iso<T: Real>(phi: &ComplexMorphism<T>) -> Result<(Vec<f64>, f64), TorsionError> {
    let per: Vec<f64> = phi
        .maps
        .iter()
        .enumerate()
        .map(|(q, m)| log_vol(m, phi.source.gram(q), phi.target.gram(q), q))
        .collect::<Result<_, _>>()?;
    let total = per.iter().enumerate().map(|(q, &v)| sign(q) * v).sum();
    Ok((per, total))
}

/// Per-degree `log vol(H^q(φ))` and the alternating total.
///
/// `H^q(φ)` is realized on harmonic representatives: the image of a source
/// harmonic cochain differs from its class's harmonic representative by an
/// exact cochain, which is orthogonal to the harmonic space.
pub fn log_cohomology_volumes<T: Real>(phi: &ComplexMorphism<T>) -> Result<(Vec<f64>, f64), TorsionError> {
    let (s, t) = (&phi.source, &phi.target);
    let (bs, bt) = (s.betti(), t.betti());
    let mut per = Vec::with_capacity(bs.len());
    for q in 0..bs.len() {
        if bs[q] != bt[q] {
            return Err(TorsionError::RankDeficient { q });
        }
        if bs[q] == 0 {
            per.push(0.0);
            continue;
        }
        let phi_o = t.to_orthonormal(q) * &phi.maps[q] * s.inv_chol_t(q);
        let m = t.harmonic_basis(q).transpose() * phi_o * s.harmonic_basis(q);
        let det = to_f64(m.determinant()).abs();
        let scale: f64 = m.row_iter().map(|r| to_f64(r.norm())).product();
        if !(det > 1e-12 * scale) {
            return Err(TorsionError::RankDeficient { q });
        }
        per.push(det.ln());
    }
    let total = per.iter().enumerate().map(|(q, &v)| sign(q) * v).sum();
    Ok((per, total))
}

/// Both sides of `T(C₂)/T(C₁) = Vol(H(φ))/Vol(φ)`, in logs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AnomalyCheck {
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// `|lhs/rhs − 1|`.
    pub residual: f64,
}

pub fn check_anomaly<T: Real>(phi: &ComplexMorphism<T>) -> Result<AnomalyCheck, TorsionError> {
    let log_lhs = log_torsion(&phi.target)? - log_torsion(&phi.source)?;
    let log_rhs = log_cohomology_volumes(phi)?.1 - log_vol_of_iso(phi)?.1;
    Ok(AnomalyCheck { log_lhs, log_rhs, residual: (log_lhs - log_rhs).exp_m1().abs() })
}
