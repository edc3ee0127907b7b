//! The integration map `Int^q(t) ω = (∫_{W⁻_y} e^{tf} ω)_{y ∈ Cr_q}` and the
//! determinants `a^q(t) = |det A^q(t)|`, `a(t) = ∏ a^q(t)^{(−1)^q}`.
//!
//! `A^q(x, y)(t)` has one row per package eigenform `ω_x(t)` and one column
//! per unstable cell `W⁻_y`.

use derham_core::{fourier, lit, to_f64, DeRhamComplex, Real};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use spectral_branches::DegreePackage;

use crate::cells::{ProductFlow, UnstableCell};
use crate::error::MorseError;
use crate::quadrature::Quadrature;

/// Component of a degree-`q` form that pairs with a cell spanned by the
/// non-point segments of `cell`.
fn component(cell: &UnstableCell, q: usize) -> usize {
    if q == 1 && cell.segments.len() == 2 {
        cell.segments.iter().position(|s| !s.is_point()).unwrap()
    } else {
        0
    }
}

/// Point of the cell at parameter `u` (one entry per non-point segment).
fn cell_point<T: Real>(cell: &UnstableCell, u: &[T]) -> Vec<T> {
    let mut k = 0;
    cell.segments
        .iter()
        .map(|s| {
            if s.is_point() {
                lit(s.from)
            } else {
                let v = lit::<T>(s.from) + u[k] * lit::<T>(s.to - s.from);
                k += 1;
                v
            }
        })
        .collect()
}

/// `|∏ (to − from)|`: the Jacobian with the parametrization sign absorbed,
/// which orients every cell by increasing angles.
fn jacobian<T: Real>(cell: &UnstableCell) -> T {
    cell.segments.iter().filter(|s| !s.is_point()).fold(T::one(), |j, s| j * lit::<T>((s.to - s.from).abs()))
}

/// Integrates the vector field `g(x)` (weighted by `e^{tf}` and the Jacobian) over a cell.
fn integrate_cell<T: Real, G: Fn(&[T]) -> DVector<T>>(
    c: &DeRhamComplex<T>,
    cell: &UnstableCell,
    t: T,
    quad: &Quadrature<T>,
    g: G,
) -> Result<DVector<T>, MorseError> {
    let f = c.f();
    let weight = |x: &[T]| (t * f.eval(x)).exp();
    let jac = jacobian::<T>(cell);
    let unit = (T::zero(), T::one());
    let v = match cell.dim() {
        0 => {
            let x = cell_point::<T>(cell, &[]);
            g(&x) * weight(&x)
        }
        1 => quad.integrate(unit.0, unit.1, |u| {
            let x = cell_point(cell, &[u]);
            g(&x) * weight(&x)
        })?,
        2 => quad.integrate_2d(unit, unit, |u, v| {
            let x = cell_point(cell, &[u, v]);
            g(&x) * weight(&x)
        })?,
        d => return Err(MorseError::Unsupported(format!("cells of dimension {d}"))),
    };
    Ok(v * jac)
}

/// Values of all basis forms of degree `q` (cutoff `cutoff`) in component `k` at `x`.
fn basis_component<T: Real>(n: usize, q: usize, cutoff: usize, k: usize, x: &[T]) -> DVector<T> {
    let len = fourier::len(cutoff);
    let scalar = len.pow(n as u32);
    let comps = derham_core::complex::binomial(n, q);
    let mut v = DVector::zeros(scalar * comps);
    let b0 = fourier::eval_basis::<T>(cutoff, x[0]);
    if n == 1 {
        v.rows_mut(k * scalar, scalar).copy_from_slice(&b0);
    } else {
        let b1 = fourier::eval_basis::<T>(cutoff, x[1]);
        for (p0, &a) in b0.iter().enumerate() {
            for (p1, &b) in b1.iter().enumerate() {
                v[k * scalar + p0 * len + p1] = a * b;
            }
        }
    }
    v
}

fn orientation<T: Real>(flow: &ProductFlow, id: usize) -> T {
    lit(flow.points[id].orientation as f64)
}

/// Matrix of `Int^q(t)` on the space of per-factor cutoff `cutoff`:
/// rows are the index-`q` critical points in id order.
pub fn int_matrix<T: Real>(
    c: &DeRhamComplex<T>,
    flow: &ProductFlow,
    q: usize,
    t: T,
    cutoff: usize,
    quad: &Quadrature<T>,
) -> Result<DMatrix<T>, MorseError> {
    let n = c.n();
    let ys = flow.of_index(q);
    let dim = fourier::len(cutoff).pow(n as u32) * derham_core::complex::binomial(n, q);
    let mut m = DMatrix::zeros(ys.len(), dim);
    for (row, y) in ys.iter().enumerate() {
        let mut acc = DVector::zeros(dim);
        for cell in flow.unstable_cells(y.id) {
            let k = component(&cell, q);
            acc += integrate_cell(c, &cell, t, quad, |x| basis_component(n, q, cutoff, k, x))?;
        }
        m.set_row(row, &(acc * orientation::<T>(flow, y.id)).transpose());
    }
    Ok(m)
}

/// `A^q(x, y)(t) = ∫_{W⁻_y} e^{tf} ω` for one form `ω` on the cutoff space,
/// by pointwise synthesis of `ω` at the quadrature nodes.
pub fn integral_a<T: Real>(
    c: &DeRhamComplex<T>,
    flow: &ProductFlow,
    q: usize,
    omega: &[T],
    y: usize,
    t: T,
    quad: &Quadrature<T>,
) -> Result<T, MorseError> {
    let mut total = T::zero();
    for cell in flow.unstable_cells(y) {
        let k = component(&cell, q);
        let v = integrate_cell(c, &cell, t, quad, |x| DVector::from_element(1, c.evaluate(q, omega, x)[k]))?;
        total += v[0];
    }
    Ok(total * orientation::<T>(flow, y))
}

/// Package eigenforms of `pkg` at `t`, as columns ordered by their assigned
/// critical point (id order).
pub fn package_basis<T: Real>(pkg: &DegreePackage<T>, t: T) -> Result<DMatrix<T>, MorseError> {
    let mut rows: Vec<(usize, DVector<T>)> = Vec::new();
    for b in pkg.package() {
        let cp = b.critical_point.ok_or(MorseError::MissingAssignment(b.id))?;
        let s = b.sample_at(t).ok_or(MorseError::MissingSample(to_f64(t)))?;
        rows.push((cp, s.vector.clone()));
    }
    rows.sort_by_key(|r| r.0);
    let cols: Vec<DVector<T>> = rows.into_iter().map(|r| r.1).collect();
    Ok(DMatrix::from_columns(&cols))
}

#[derive(Debug, Clone, Serialize)]
pub struct ADeterminant {
    pub q: usize,
    pub t: f64,
    pub matrix: Vec<Vec<f64>>,
    /// `|det A^q(t)|`.
    pub a_q: f64,
    /// Hadamard bound `∏_rows ‖row‖`, the natural size of `|det|`.
    pub scale: f64,
    /// `a_q < 1e−12 · scale`: a potential zero.
    pub singular: bool,
    /// `σ_max / σ_min` of `A^q(t)`.
    pub condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AReport {
    pub t: f64,
    pub degrees: Vec<ADeterminant>,
    pub a: f64,
    pub log_a: f64,
}

impl AReport {
    pub fn positive(&self) -> bool {
        self.a > 0.0 && self.a.is_finite() && self.degrees.iter().all(|d| !d.singular)
    }
}

/// `A^q(t)` as `(Int^q(t) W)ᵀ` with `W` the package basis at `t`.
pub fn a_matrix<T: Real>(
    c: &DeRhamComplex<T>,
    flow: &ProductFlow,
    pkg: &DegreePackage<T>,
    t: T,
    quad: &Quadrature<T>,
) -> Result<DMatrix<T>, MorseError> {
    let w = package_basis(pkg, t)?;
    let int = int_matrix(c, flow, pkg.q, t, c.cutoff(), quad)?;
    Ok((int * w).transpose())
}

pub fn determinant<T: Real>(q: usize, t: T, a: &DMatrix<T>) -> ADeterminant {
    let af = a.map(to_f64);
    let det = af.clone().determinant().abs();
    let scale: f64 = af.row_iter().map(|r| r.norm()).product();
    let sv = af.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    ADeterminant {
        q,
        t: to_f64(t),
        matrix: af.row_iter().map(|r| r.iter().copied().collect()).collect(),
        a_q: det,
        scale,
        singular: det < 1e-12 * scale,
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
    }
}

/// `a^q(t)` for every degree and `a(t) = ∏ a^q(t)^{(−1)^q}`.
pub fn a_report<T: Real>(
    c: &DeRhamComplex<T>,
    flow: &ProductFlow,
    pkgs: &[DegreePackage<T>],
    t: T,
    quad: &Quadrature<T>,
) -> Result<AReport, MorseError> {
    let mut degrees = Vec::with_capacity(pkgs.len());
    let mut log_a = 0.0;
    for pkg in pkgs {
        let a = a_matrix(c, flow, pkg, t, quad)?;
        let d = determinant(pkg.q, t, &a);
        let s = if pkg.q % 2 == 0 { 1.0 } else { -1.0 };
        log_a += s * d.a_q.ln();
        degrees.push(d);
    }
    Ok(AReport { t: to_f64(t), degrees, a: log_a.exp(), log_a })
}
