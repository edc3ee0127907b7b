use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::DeRhamError;
use crate::fourier;
use crate::trigpoly::TrigPoly;
use crate::Real;

/// Built-in flat manifolds, both with angle coordinates of period 2π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Circle,
    FlatTorus,
}

impl Manifold {
    pub fn dim(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::FlatTorus => 2,
        }
    }

    pub fn betti(self) -> Vec<usize> {
        match self {
            Manifold::Circle => vec![1, 1],
            Manifold::FlatTorus => vec![1, 2, 1],
        }
    }

    pub fn euler_characteristic(self) -> i64 {
        self.betti().iter().enumerate().map(|(q, &b)| if q % 2 == 0 { b as i64 } else { -(b as i64) }).sum()
    }

    /// Riemannian volume of the flat model.
    pub fn volume(self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim() as i32)
    }
}

/// Number of scalar components of a `q`-form on an `n`-manifold.
pub fn binomial(n: usize, q: usize) -> usize {
    match (n, q) {
        (_, 0) => 1,
        (n, q) if q > n => 0,
        (n, q) => binomial(n - 1, q - 1) * n / q,
    }
}

/// Coefficients of the quadratic matrix polynomial `L0 + t L1 + t² L2`.
#[derive(Debug, Clone)]
struct Quadratic<T: Real> {
    l0: DMatrix<T>,
    l1: DMatrix<T>,
    l2: DMatrix<T>,
}

/// Galerkin de Rham complex with Witten deformation by `f`.
///
/// Degree `q` coefficient vectors are blocks of scalar Fourier coefficients:
/// one block on the circle and in degrees 0 and 2 on the torus, two blocks
/// `(α, β)` for `α dθ₁ + β dθ₂` in degree 1 on the torus.
#[derive(Debug, Clone)]
pub struct DeRhamComplex<T: Real> {
    manifold: Manifold,
    cutoff: usize,
    ext: usize,
    f: TrigPoly<T>,
    dims: Vec<usize>,
    d: Vec<DMatrix<T>>,
    e: Vec<DMatrix<T>>,
    d_ext: Vec<DMatrix<T>>,
    e_ext: Vec<DMatrix<T>>,
    star: Vec<DMatrix<T>>,
    lap: Vec<Quadratic<T>>,
}

/// Scalar multiplication by a trig polynomial between per-factor cutoffs.
fn mult_op<T: Real>(g: &TrigPoly<T>, from: usize, to: usize) -> DMatrix<T> {
    let n = fourier::len(to).pow(g.arity() as u32);
    let m = fourier::len(from).pow(g.arity() as u32);
    let mut out = DMatrix::zeros(n, m);
    for (modes, c) in g.terms() {
        let mut k = fourier::mult_matrix(&[(modes[0], c)], from, to);
        for &j in &modes[1..] {
            k = k.kronecker(&fourier::mult_matrix(&[(j, T::one())], from, to));
        }
        out += k;
    }
    out
}

/// `∂/∂θ_k` between per-factor cutoffs.
fn deriv_op<T: Real>(arity: usize, k: usize, from: usize, to: usize) -> DMatrix<T> {
    let mut out = DMatrix::from_element(1, 1, T::one());
    for i in 0..arity {
        let factor =
            if i == k { fourier::deriv_matrix::<T>(from, to) } else { fourier::inclusion::<T>(from, to) };
        out = out.kronecker(&factor);
    }
    out
}

fn vstack<T: Real>(blocks: &[DMatrix<T>]) -> DMatrix<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks[0].ncols();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

fn hstack<T: Real>(blocks: &[DMatrix<T>]) -> DMatrix<T> {
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let rows = blocks[0].nrows();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

fn symmetrize<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    let half = nalgebra::convert::<f64, T>(0.5);
    (&m + m.transpose()) * half
}

impl<T: Real> DeRhamComplex<T> {
    /// Complex on the circle with mode cutoff `cutoff`.
    pub fn circle(cutoff: usize, f: TrigPoly<T>) -> Result<Self, DeRhamError> {
        Self::build(Manifold::Circle, cutoff, f)
    }

    /// Complex on the flat torus with mode cutoff `cutoff` per factor.
    pub fn torus(cutoff: usize, f: TrigPoly<T>) -> Result<Self, DeRhamError> {
        Self::build(Manifold::FlatTorus, cutoff, f)
    }

    /// Smallest admissible cutoff for `f`.
    pub fn min_cutoff(f: &TrigPoly<T>) -> usize {
        2 * f.max_freq() + 2
    }

    pub fn build(manifold: Manifold, cutoff: usize, f: TrigPoly<T>) -> Result<Self, DeRhamError> {
        let n = manifold.dim();
        if f.arity() != n {
            return Err(DeRhamError::ArityMismatch { expected: n, got: f.arity() });
        }
        let required = Self::min_cutoff(&f);
        if cutoff < required {
            return Err(DeRhamError::CutoffTooSmall { cutoff, required });
        }
        let ext = f.max_freq();
        let grad = f.gradient();
        let scalar = fourier::len(cutoff).pow(n as u32);
        let dims: Vec<usize> = (0..=n).map(|q| scalar * binomial(n, q)).collect();

        // Differential blocks (D, E) of degree q between per-factor cutoffs.
        let blocks = |q: usize, from: usize, to: usize| -> (DMatrix<T>, DMatrix<T>) {
            let dd: Vec<DMatrix<T>> = (0..n).map(|k| deriv_op(n, k, from, to)).collect();
            let ee: Vec<DMatrix<T>> = grad.iter().map(|g| mult_op(g, from, to)).collect();
            match (n, q) {
                (1, 0) => (dd[0].clone(), ee[0].clone()),
                (2, 0) => (vstack(&dd), vstack(&ee)),
                (2, 1) => (hstack(&[-&dd[1], dd[0].clone()]), hstack(&[-&ee[1], ee[0].clone()])),
                _ => unreachable!(),
            }
        };

        let mut d = Vec::new();
        let mut e = Vec::new();
        let mut d_ext = Vec::new();
        let mut e_ext = Vec::new();
        for q in 0..n {
            let (a, b) = blocks(q, cutoff, cutoff);
            d.push(a);
            e.push(b);
            let (a, b) = blocks(q, cutoff, cutoff + ext);
            d_ext.push(a);
            e_ext.push(b);
        }

        // Exact Galerkin projection of d δ + δ d: the outgoing differential is
        // taken into the enlarged space, the incoming one from it.
        let mut lap = Vec::new();
        for q in 0..=n {
            let dim = dims[q];
            let mut l0 = DMatrix::zeros(dim, dim);
            let mut l1 = DMatrix::zeros(dim, dim);
            let mut l2 = DMatrix::zeros(dim, dim);
            if q < n {
                let (gd, ge) = (&d_ext[q], &e_ext[q]);
                let gdt = gd.transpose();
                let get = ge.transpose();
                l0 += &gdt * gd;
                l1 += &gdt * ge + &get * gd;
                l2 += &get * ge;
            }
            if q > 0 {
                let (hd, he) = blocks(q - 1, cutoff + ext, cutoff);
                let hdt = hd.transpose();
                let het = he.transpose();
                l0 += &hd * &hdt;
                l1 += &hd * &het + &he * &hdt;
                l2 += &he * &het;
            }
            lap.push(Quadratic { l0: symmetrize(l0), l1: symmetrize(l1), l2: symmetrize(l2) });
        }

        let star = match n {
            1 => vec![DMatrix::identity(scalar, scalar), DMatrix::identity(scalar, scalar)],
            _ => {
                let mut s1 = DMatrix::zeros(2 * scalar, 2 * scalar);
                for i in 0..scalar {
                    s1[(i, scalar + i)] = -T::one();
                    s1[(scalar + i, i)] = T::one();
                }
                vec![DMatrix::identity(scalar, scalar), s1, DMatrix::identity(scalar, scalar)]
            }
        };

        Ok(Self { manifold, cutoff, ext, f, dims, d, e, d_ext, e_ext, star, lap })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn n(&self) -> usize {
        self.manifold.dim()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Cutoff of the enlarged space receiving `d(t)` without projection.
    pub fn ext_cutoff(&self) -> usize {
        self.cutoff + self.ext
    }

    pub fn f(&self) -> &TrigPoly<T> {
        &self.f
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn betti(&self) -> Vec<usize> {
        self.manifold.betti()
    }

    /// Number of scalar Fourier modes per component.
    pub fn scalar_dim(&self) -> usize {
        fourier::len(self.cutoff).pow(self.n() as u32)
    }

    fn check_d(&self, q: usize) -> Result<(), DeRhamError> {
        if q >= self.n() {
            return Err(DeRhamError::DegreeOutOfRange { q, n: self.n() });
        }
        Ok(())
    }

    fn check_q(&self, q: usize) -> Result<(), DeRhamError> {
        if q > self.n() {
            return Err(DeRhamError::DegreeOutOfRange { q, n: self.n() });
        }
        Ok(())
    }

    /// Undeformed differential `D[q]` on the cutoff space.
    pub fn d_matrix(&self, q: usize) -> Result<&DMatrix<T>, DeRhamError> {
        self.check_d(q)?;
        Ok(&self.d[q])
    }

    /// Projected exterior multiplication `E[q] = P (df ∧ ·)`.
    pub fn e_matrix(&self, q: usize) -> Result<&DMatrix<T>, DeRhamError> {
        self.check_d(q)?;
        Ok(&self.e[q])
    }

    /// `D[q] + t E[q]`, the projected Witten differential.
    pub fn witten_d(&self, q: usize, t: T) -> Result<DMatrix<T>, DeRhamError> {
        self.check_d(q)?;
        Ok(&self.d[q] + &self.e[q] * t)
    }

    /// `d(t)` from the cutoff space into the enlarged space, without projection.
    pub fn witten_d_ext(&self, q: usize, t: T) -> Result<DMatrix<T>, DeRhamError> {
        self.check_d(q)?;
        Ok(&self.d_ext[q] + &self.e_ext[q] * t)
    }

    /// `Δ^q(t)` as a symmetric positive semidefinite matrix.
    pub fn witten_laplacian(&self, q: usize, t: T) -> Result<DMatrix<T>, DeRhamError> {
        self.check_q(q)?;
        let l = &self.lap[q];
        Ok(&l.l0 + &l.l1 * t + &l.l2 * (t * t))
    }

    /// `dΔ^q/dt = L1 + 2t L2`.
    pub fn laplacian_derivative(&self, q: usize, t: T) -> Result<DMatrix<T>, DeRhamError> {
        self.check_q(q)?;
        let l = &self.lap[q];
        Ok(&l.l1 + &l.l2 * (t + t))
    }

    /// Coefficients `(L0, L1, L2)` of `Δ^q(t) = L0 + t L1 + t² L2`.
    pub fn laplacian_coefficients(&self, q: usize) -> Result<[&DMatrix<T>; 3], DeRhamError> {
        self.check_q(q)?;
        let l = &self.lap[q];
        Ok([&l.l0, &l.l1, &l.l2])
    }

    /// Hodge star `⋆^q` from degree `q` to degree `n - q`.
    pub fn hodge_star(&self, q: usize) -> Result<&DMatrix<T>, DeRhamError> {
        self.check_q(q)?;
        Ok(&self.star[q])
    }

    /// Number of scalar components of a degree-`q` form.
    pub fn components(&self, q: usize) -> usize {
        binomial(self.n(), q)
    }

    /// Point values of the components of a degree-`q` form at `x`, for a
    /// coefficient vector on a space of per-factor cutoff `cutoff`.
    pub fn evaluate_at_cutoff(&self, q: usize, cutoff: usize, coeffs: &[T], x: &[T]) -> Vec<T> {
        let n = self.n();
        let len = fourier::len(cutoff);
        let scalar = len.pow(n as u32);
        let comps = binomial(n, q);
        assert_eq!(coeffs.len(), scalar * comps, "coefficient vector has the wrong length");
        let b0 = fourier::eval_basis::<T>(cutoff, x[0]);
        let b1 = if n == 2 { fourier::eval_basis::<T>(cutoff, x[1]) } else { Vec::new() };
        (0..comps)
            .map(|k| {
                let block = &coeffs[k * scalar..(k + 1) * scalar];
                if n == 1 {
                    block.iter().zip(&b0).fold(T::zero(), |a, (&c, &b)| a + c * b)
                } else {
                    let mut acc = T::zero();
                    for (p0, &v0) in b0.iter().enumerate() {
                        let row = &block[p0 * len..(p0 + 1) * len];
                        let s = row.iter().zip(&b1).fold(T::zero(), |a, (&c, &b)| a + c * b);
                        acc += v0 * s;
                    }
                    acc
                }
            })
            .collect()
    }

    /// Point values of a degree-`q` form given on the cutoff space.
    pub fn evaluate(&self, q: usize, coeffs: &[T], x: &[T]) -> Vec<T> {
        self.evaluate_at_cutoff(q, self.cutoff, coeffs, x)
    }

    /// Coefficient vector (cutoff space) of the harmonic form of degree `q`
    /// that is a unit multiple of the `k`-th coordinate form.
    pub fn coordinate_form(&self, q: usize, k: usize) -> Vec<T> {
        let scalar = self.scalar_dim();
        let mut v = vec![T::zero(); self.dims[q]];
        v[k * scalar] = T::one();
        v
    }
}
