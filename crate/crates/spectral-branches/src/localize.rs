//! Assignment of package branches to critical points by localized mass.
//!
//! Near `T_max` the package eigenvalues are often numerically degenerate
//! (all below the kernel tolerance), so the tracked vectors in such a cluster
//! are an arbitrary basis of the package space. Masses are therefore taken
//! in the localized basis of each cluster: the eigenvectors of
//! `Σ_x w_x M_x`, where `M_x` is the Gram matrix of the cluster restricted to
//! the ball around site `x` and the weights `w_x` are distinct.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use derham_core::{lit, to_f64, DeRhamComplex, Real};
use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassifyOptions, DegreePackage};
use crate::error::SpectralError;
use crate::matching::clusters;

/// A critical point as seen by the localization step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub coords: Vec<f64>,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeOptions {
    pub radius: f64,
    pub mass_min: f64,
    /// Gauss-Legendre nodes per radial (or arc) direction.
    pub nodes: usize,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self { radius: PI / 8.0, mass_min: 0.5, nodes: 48 }
    }
}

/// Quadrature points `(x, weight)` covering the geodesic ball of radius `r` around `x0`.
pub fn ball_rule(x0: &[f64], r: f64, nodes: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = GaussLegendre::new(NonZeroUsize::new(nodes.max(1)).unwrap());
    let pairs = gl.as_node_weight_pairs();
    match x0.len() {
        1 => pairs.iter().map(|&(s, w)| (vec![x0[0] + r * s], r * w)).collect(),
        2 => {
            let m = 2 * nodes;
            let dphi = 2.0 * PI / m as f64;
            let mut out = Vec::with_capacity(nodes * m);
            for &(s, w) in pairs {
                let rho = 0.5 * r * (s + 1.0);
                let wr = 0.5 * r * w * rho;
                for a in 0..m {
                    let phi = a as f64 * dphi;
                    out.push((vec![x0[0] + rho * phi.cos(), x0[1] + rho * phi.sin()], wr * dphi));
                }
            }
            out
        }
        n => panic!("ball quadrature implemented for dimension 1 and 2, got {n}"),
    }
}

/// Gram matrix `∫_B ⟨ω_a, ω_b⟩` of the degree-`q` forms `vs` over a ball rule.
pub fn local_gram<T: Real>(c: &DeRhamComplex<T>, q: usize, vs: &[DVector<T>], rule: &[(Vec<f64>, f64)]) -> DMatrix<f64> {
    let k = vs.len();
    let mut g = DMatrix::zeros(k, k);
    for (x, w) in rule {
        let xt: Vec<T> = x.iter().map(|&v| lit(v)).collect();
        let vals: Vec<Vec<f64>> =
            vs.iter().map(|v| c.evaluate(q, v.as_slice(), &xt).into_iter().map(to_f64).collect()).collect();
        for a in 0..k {
            for b in a..k {
                let s: f64 = vals[a].iter().zip(&vals[b]).map(|(p, r)| p * r).sum();
                g[(a, b)] += w * s;
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            g[(a, b)] = g[(b, a)];
        }
    }
    g
}

/// Mass of each package branch (rows, in `package()` order) at each site.
fn mass_table<T: Real>(
    c: &DeRhamComplex<T>,
    pkg: &DegreePackage<T>,
    sites: &[Site],
    copts: &ClassifyOptions<T>,
    opts: &LocalizeOptions,
) -> (Vec<usize>, DMatrix<f64>) {
    let branches = pkg.package();
    let ids: Vec<usize> = branches.iter().map(|b| b.id).collect();
    let vecs: Vec<DVector<T>> = branches.iter().map(|b| b.last().vector.clone()).collect();
    let lam_max = branches[0].last().lambda_max;
    let tol_zero = to_f64(copts.tol_zero(lam_max));
    let rules: Vec<_> = sites.iter().map(|s| ball_rule(&s.coords, opts.radius, opts.nodes)).collect();
    let grams: Vec<DMatrix<f64>> = rules.iter().map(|r| local_gram(c, pkg.q, &vecs, r)).collect();

    // Values below the kernel tolerance are indistinguishable; merge them into one cluster.
    let vals: Vec<f64> = branches.iter().map(|b| to_f64(b.last().lambda).max(tol_zero)).collect();
    let groups = clusters(&vals, 1e-6);
    let k = vecs.len();
    let mut basis = DMatrix::<f64>::identity(k, k);
    for g in groups.iter().filter(|g| g.len() > 1) {
        let mut combo = DMatrix::<f64>::zeros(g.len(), g.len());
        for (x, gram) in grams.iter().enumerate() {
            let w = (x + 1) as f64;
            for (a, &ia) in g.iter().enumerate() {
                for (b, &ib) in g.iter().enumerate() {
                    combo[(a, b)] += w * gram[(ia, ib)];
                }
            }
        }
        let eig = SymmetricEigen::new(combo);
        for (a, &ia) in g.iter().enumerate() {
            for (b, &ib) in g.iter().enumerate() {
                basis[(ia, ib)] = eig.eigenvectors[(a, b)];
            }
        }
    }
    let mut masses = DMatrix::zeros(k, sites.len());
    for (x, gram) in grams.iter().enumerate() {
        let m = basis.transpose() * gram * &basis;
        for i in 0..k {
            masses[(i, x)] = m[(i, i)];
        }
    }
    (ids, masses)
}

/// Assigns every package branch of `pkg` to a distinct site of index `q`.
///
/// Sets `critical_point` on the assigned branches and fills `pkg.masses`
/// with `(branch id, site id, mass)`; `pkg.ambiguous` is raised when an
/// assigned mass falls below `mass_min`.
pub fn assign_to_critical_points<T: Real>(
    c: &DeRhamComplex<T>,
    pkg: &mut DegreePackage<T>,
    sites: &[Site],
    copts: &ClassifyOptions<T>,
    opts: &LocalizeOptions,
) -> Result<(), SpectralError> {
    let sites: Vec<Site> = sites.iter().filter(|s| s.index == pkg.q).cloned().collect();
    if sites.len() != pkg.c {
        return Err(SpectralError::SiteCountMismatch { q: pkg.q, sites: sites.len(), c: pkg.c });
    }
    let (ids, masses) = mass_table(c, pkg, &sites, copts, opts);
    let k = ids.len();
    let w: Vec<i64> = (0..k)
        .flat_map(|i| (0..k).map(move |x| (i, x)))
        .map(|(i, x)| (masses[(i, x)] * 1e12).round() as i64)
        .collect();
    let (_, assignment) = kuhn_munkres(&Matrix::from_vec(k, k, w).expect("square weight matrix"));
    pkg.masses.clear();
    pkg.ambiguous = false;
    for (i, &x) in assignment.iter().enumerate() {
        let m = masses[(i, x)];
        if m < opts.mass_min {
            pkg.ambiguous = true;
        }
        pkg.masses.push((ids[i], sites[x].id, lit(m)));
        if let Some(b) = pkg.branches.iter_mut().find(|b| b.id == ids[i]) {
            b.critical_point = Some(sites[x].id);
        }
    }
    Ok(())
}
