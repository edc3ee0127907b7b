//! Assembling the torsion of a manifold from the small spectrum, the
//! integration determinant `a(0)` and the harmonic volumes.
//!
//! For the cochain isomorphism `Int : Ω_vs(t) → C*` the anomaly formula gives
//! `T(C*) = T(Ω_vs(t)) · Vol(H(Int)) / a(t)` because `Vol(Int) = a(t)` in
//! orthonormal bases. At `t = 0` this yields
//!
//! `log 𝕋or(M) = Σ_q ½ q (−1)^{q+1} Σ log λ_i^q(0) − log a(0) − log 𝕍`,
//!
//! which is what [`evaluate_theorem`] reports as the estimate. The variant
//! with `+ log a(0)` is reported alongside as `literal_estimate`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::complex::{log_cohomology_volumes, log_det_prime_laplacians, log_torsion, log_vol_of_iso, sign, ComplexMorphism, FiniteComplex};
use crate::error::TorsionError;
use crate::volumes::HarmonicVolumes;

/// A real number stored as a sign and `log |x|`, so that products of many
/// small or large factors stay representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub fn from_value(x: f64) -> Self {
        let sign = if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        };
        Self { sign, log_abs: x.abs().ln() }
    }

    pub fn from_log(log_abs: f64) -> Self {
        Self { sign: 1, log_abs }
    }

    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeTerm {
    pub q: usize,
    pub count: usize,
    /// `Σ log λ_i^q(0)` over the virtually small positive branches.
    pub log_product: f64,
    /// `½ q (−1)^{q+1}`.
    pub weight: f64,
    pub contribution: f64,
}

/// Internal consistency of `T(C*) = T(Ω_vs) · Vol(H(Int)) / a` at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeCheck {
    pub t: f64,
    pub log_det_prime_vs: Vec<f64>,
    pub log_t_vs: f64,
    pub log_t_morse: f64,
    pub log_vol_int: f64,
    pub log_vol_h: f64,
    pub log_a: f64,
    /// Relative residual of `Int ∘ d_vs = ∂ ∘ Int`.
    pub chain_residual: f64,
    /// `|log T(Ω_vs) − log Vol(Int) + log Vol(H(Int)) − log T(C*)|`.
    pub residual: f64,
    /// `|log Vol(Int) − log a|`.
    pub a_residual: f64,
}

/// Builds `Ω_vs(t)` from orthonormal bases `w[q]` of the small eigenspaces
/// and checks the composite identity against the Morse complex.
///
/// `d[q]` is the Witten differential at `t`, `int[q]` the integration map
/// (rows indexed by critical points) and `morse` the integer coboundaries.
pub fn composite_check(
    t: f64,
    d: &[DMatrix<f64>],
    w: &[DMatrix<f64>],
    int: &[DMatrix<f64>],
    morse: &[DMatrix<f64>],
    log_a: f64,
    chain_tol: f64,
) -> Result<CompositeCheck, TorsionError> {
    let top = w.len() - 1;
    let d_vs: Vec<DMatrix<f64>> = (0..top).map(|q| w[q + 1].transpose() * &d[q] * &w[q]).collect();
    let vs = FiniteComplex::orthonormal(d_vs)?;
    let c = FiniteComplex::orthonormal(morse.to_vec())?;
    let maps: Vec<DMatrix<f64>> = (0..=top).map(|q| &int[q] * &w[q]).collect();
    let phi = ComplexMorphism::with_tolerance(vs, c, maps, chain_tol)?;
    let log_det_prime_vs = log_det_prime_laplacians(&phi.source)?;
    let log_t_vs = log_torsion(&phi.source)?;
    let log_t_morse = log_torsion(&phi.target)?;
    let log_vol_int = log_vol_of_iso(&phi)?.1;
    let log_vol_h = log_cohomology_volumes(&phi)?.1;
    Ok(CompositeCheck {
        t,
        log_det_prime_vs,
        log_t_vs,
        log_t_morse,
        log_vol_int,
        log_vol_h,
        log_a,
        chain_residual: phi.chain_residual(),
        residual: (log_t_vs - log_vol_int + log_vol_h - log_t_morse).abs(),
        a_residual: (log_vol_int - log_a).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionReport {
    pub terms: Vec<DegreeTerm>,
    pub first_term: f64,
    pub a0: SignedLog,
    pub volumes: HarmonicVolumes,
    /// `first_term − log a(0) − log 𝕍`.
    pub estimate: f64,
    /// `first_term + log a(0) − log 𝕍`.
    pub literal_estimate: f64,
    pub expected: f64,
    pub error: f64,
    pub composite: Option<CompositeCheck>,
}

impl TorsionReport {
    /// Sum of the reported breakdown, equal to `estimate` up to rounding.
    pub fn breakdown_total(&self) -> f64 {
        self.terms.iter().map(|t| t.contribution).sum::<f64>() - self.a0.log_abs - self.volumes.log_v
    }
}

/// `vs_lambda0[q]` holds `λ(0)` for the virtually small positive branches of
/// degree `q`; `expected` is the known `log 𝕋or(M)`.
pub fn evaluate_theorem(
    vs_lambda0: &[Vec<f64>],
    a0: f64,
    volumes: HarmonicVolumes,
    expected: f64,
) -> Result<TorsionReport, TorsionError> {
    for (q, ls) in vs_lambda0.iter().enumerate() {
        if let Some(&value) = ls.iter().find(|&&l| !(l > 0.0)) {
            return Err(TorsionError::VsVanishes { q, value });
        }
    }
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(TorsionError::BadA(a0));
    }
    let terms: Vec<DegreeTerm> = vs_lambda0
        .iter()
        .enumerate()
        .map(|(q, ls)| {
            let log_product: f64 = ls.iter().map(|l| l.ln()).sum();
            let weight = 0.5 * q as f64 * sign(q + 1) + 0.0;
            DegreeTerm { q, count: ls.len(), log_product, weight, contribution: weight * log_product }
        })
        .collect();
    let first_term: f64 = terms.iter().map(|t| t.contribution).sum();
    let log_a = a0.ln();
    let estimate = first_term - log_a - volumes.log_v;
    let literal_estimate = first_term + log_a - volumes.log_v;
    Ok(TorsionReport {
        terms,
        first_term,
        a0: SignedLog::from_value(a0),
        volumes,
        estimate,
        literal_estimate,
        expected,
        error: (estimate - expected).abs(),
        composite: None,
    })
}
