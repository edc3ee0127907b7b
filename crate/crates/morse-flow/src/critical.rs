//! Critical points of trigonometric polynomials by multi-start Newton.

use std::f64::consts::PI;

use derham_core::{lit, to_f64, Manifold, Real, TrigPoly};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use spectral_branches::Site;

use crate::error::MorseError;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalOptions {
    /// Newton seeds per unit of frequency along each axis.
    pub seeds_per_mode: usize,
    pub grad_tol: f64,
    pub nondegen_tol: f64,
    /// Angular distance below which two roots are the same point.
    pub dedup_tol: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self { seeds_per_mode: 16, grad_tol: 1e-12, nondegen_tol: 1e-8, dedup_tol: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub id: usize,
    /// Angles in `[0, 2π)`.
    pub coords: Vec<f64>,
    pub index: usize,
    pub value: f64,
    pub hessian_eigenvalues: Vec<f64>,
    /// Orientation `𝒪_x` of the unstable cell, `±1`.
    pub orientation: i32,
}

impl CriticalPoint {
    pub fn site(&self) -> Site {
        Site { id: self.id, coords: self.coords.clone(), index: self.index }
    }
}

pub fn sites(points: &[CriticalPoint]) -> Vec<Site> {
    points.iter().map(CriticalPoint::site).collect()
}

/// Number of critical points of each index.
pub fn counts(points: &[CriticalPoint], n: usize) -> Vec<usize> {
    (0..=n).map(|q| points.iter().filter(|p| p.index == q).count()).collect()
}

pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TWO_PI);
    if y >= TWO_PI { 0.0 } else { y }
}

/// Distance on the circle.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    d.min(TWO_PI - d)
}

struct Derivs<T: Real> {
    grad: Vec<TrigPoly<T>>,
    hess: Vec<Vec<TrigPoly<T>>>,
}

impl<T: Real> Derivs<T> {
    fn new(f: &TrigPoly<T>) -> Self {
        let grad = f.gradient();
        let hess = grad.iter().map(|g| g.gradient()).collect();
        Self { grad, hess }
    }

    fn at(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let xt: Vec<T> = x.iter().map(|&v| lit(v)).collect();
        let n = x.len();
        let g = DVector::from_fn(n, |i, _| to_f64(self.grad[i].eval(&xt)));
        let h = DMatrix::from_fn(n, n, |i, j| to_f64(self.hess[i][j].eval(&xt)));
        (g, (&h + h.transpose()) * 0.5)
    }
}

fn newton<T: Real>(d: &Derivs<T>, x0: &[f64]) -> Option<Vec<f64>> {
    let mut x = x0.to_vec();
    // Iterate on the step size, not the residual: at a degenerate root the
    // gradient is tiny long before the Hessian is.
    for _ in 0..120 {
        let (g, h) = d.at(&x);
        if g.amax() == 0.0 {
            return Some(x);
        }
        let Some(step) = h.lu().solve(&g) else {
            return (g.amax() < 1e-14).then_some(x);
        };
        if step.amax() > 0.5 {
            return None;
        }
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
        if step.amax() < 1e-15 {
            return Some(x);
        }
    }
    Some(x)
}

/// All critical points of `f` on `manifold`, sorted by index then coordinates.
pub fn find_critical_points<T: Real>(
    f: &TrigPoly<T>,
    manifold: Manifold,
    opts: &CriticalOptions,
) -> Result<Vec<CriticalPoint>, MorseError> {
    let n = manifold.dim();
    if f.arity() != n {
        return Err(derham_core::DeRhamError::ArityMismatch { expected: n, got: f.arity() }.into());
    }
    if (0..n).any(|k| f.max_freq_in(k) == 0) {
        return Err(MorseError::ConstantFactor);
    }
    let d = Derivs::new(f);
    let per_axis: Vec<usize> = (0..n).map(|k| opts.seeds_per_mode * f.max_freq_in(k).max(1)).collect();
    let total: usize = per_axis.iter().product();

    let mut roots: Vec<Vec<f64>> = Vec::new();
    for s in 0..total {
        let mut rem = s;
        let seed: Vec<f64> = per_axis
            .iter()
            .map(|&m| {
                let i = rem % m;
                rem /= m;
                (i as f64 + 0.5) * TWO_PI / m as f64
            })
            .collect();
        let Some(x) = newton(&d, &seed) else { continue };
        let x: Vec<f64> = x.into_iter().map(wrap).collect();
        if d.at(&x).0.amax() > 1e-9 {
            continue;
        }
        let dup = roots.iter().any(|r| r.iter().zip(&x).all(|(a, b)| angle_dist(*a, *b) < opts.dedup_tol));
        if !dup {
            roots.push(x);
        }
    }

    let mut points = Vec::with_capacity(roots.len());
    for x in roots {
        let (g, h) = d.at(&x);
        let eig = SymmetricEigen::new(h);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_abs = ev.iter().fold(f64::INFINITY, |m, &v| m.min(v.abs()));
        if min_abs < opts.nondegen_tol || g.amax() > opts.grad_tol {
            return Err(MorseError::NonMorse { coords: x, min_eig: min_abs });
        }
        let xt: Vec<T> = x.iter().map(|&v| lit(v)).collect();
        points.push(CriticalPoint {
            id: 0,
            index: ev.iter().filter(|&&v| v < 0.0).count(),
            value: to_f64(f.eval(&xt)),
            coords: x,
            hessian_eigenvalues: ev,
            orientation: 1,
        });
    }
    points.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.coords.partial_cmp(&b.coords).unwrap()));
    for (i, p) in points.iter_mut().enumerate() {
        p.id = i;
    }

    let c = counts(&points, n);
    let found: i64 = c.iter().enumerate().map(|(q, &k)| if q % 2 == 0 { k as i64 } else { -(k as i64) }).sum();
    let expected = manifold.euler_characteristic();
    if found != expected {
        return Err(MorseError::EulerMismatch { counts: c, found, expected });
    }
    Ok(points)
}
