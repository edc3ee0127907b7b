//! Volumes of integral cohomology in the harmonic forms of a flat torus.
//!
//! With `h_1, …, h_β` an `L²`-orthonormal basis of harmonic `r`-forms and
//! `γ_1, …, γ_β` a basis of `H_r(M; ℤ)`, the period matrix is
//! `P_ij = ∫_{γ_j} h_i` and the lattice `H^r(M; ℤ)` has covolume
//! `V_r = 1 / |det P|`.

use std::f64::consts::PI;

use derham_core::Manifold;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::complex::sign;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicVolumes {
    /// Length scale of the metric: lengths are multiplied by this factor.
    pub metric_scale: f64,
    /// `V_r` for `r = 0, …, n`.
    pub per_degree: Vec<f64>,
    /// `log 𝕍 = Σ_r (−1)^r log V_r`.
    pub log_v: f64,
}

impl HarmonicVolumes {
    pub fn v(&self) -> f64 {
        self.log_v.exp()
    }
}

fn subsets(n: usize, r: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == r).collect()
}

/// Period matrix of the coordinate forms `dθ_I / ‖dθ_I‖` against the
/// coordinate subtori `T_J`, for `|I| = |J| = r`.
pub fn period_matrix(manifold: Manifold, r: usize, metric_scale: f64) -> DMatrix<f64> {
    let n = manifold.dim();
    let idx = subsets(n, r);
    // ‖dθ_I‖² = s^{n−2r} (2π)^n for the metric s² Σ dθ_k².
    let norm = metric_scale.powf(n as f64 / 2.0 - r as f64) * (2.0 * PI).powf(n as f64 / 2.0);
    let period = (2.0 * PI).powi(r as i32);
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| if idx[i] == idx[j] { period / norm } else { 0.0 })
}

pub fn harmonic_volumes(manifold: Manifold, metric_scale: f64) -> HarmonicVolumes {
    let n = manifold.dim();
    let per_degree: Vec<f64> =
        (0..=n).map(|r| 1.0 / period_matrix(manifold, r, metric_scale).determinant().abs()).collect();
    let log_v = per_degree.iter().enumerate().map(|(r, v)| sign(r) * v.ln()).sum();
    HarmonicVolumes { metric_scale, per_degree, log_v }
}
