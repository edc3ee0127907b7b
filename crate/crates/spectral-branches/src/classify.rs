//! Splitting tracked branches into the zero, virtually small and large parts.

use derham_core::{lit, to_f64, Real};
use serde::Serialize;

use crate::error::SpectralError;
use crate::tracking::{EigenBranch, Label};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions<T> {
    /// Kernel tolerance is `zero_tol * (1 + λ_max(t))`.
    pub zero_tol: T,
    /// A small branch must satisfy `λ(T) ≤ decay_ratio · λ(T/2)`.
    pub decay_ratio: T,
    /// Required ratio between the smallest large and the largest small value at `T`.
    pub gap_min: T,
}

impl<T: Real> Default for ClassifyOptions<T> {
    fn default() -> Self {
        Self { zero_tol: lit(1e-9), decay_ratio: lit(0.5), gap_min: lit(10.0) }
    }
}

impl<T: Real> ClassifyOptions<T> {
    pub fn tol_zero(&self, lambda_max: T) -> T {
        self.zero_tol * (T::one() + lambda_max.abs())
    }
}

/// Classified branches of one degree.
#[derive(Debug, Clone)]
pub struct DegreePackage<T: Real> {
    pub q: usize,
    pub beta: usize,
    pub c: usize,
    pub t_max: T,
    /// All tracked branches, labelled.
    pub branches: Vec<EigenBranch<T>>,
    /// `λ_LARGE,min(T) / max(λ_VS,max(T), tol_zero)`; infinite without large branches.
    pub gap: T,
    /// Branch ids of large branches whose value did not grow from `T/2` to `T`.
    pub non_growing: Vec<usize>,
    /// Critical-point assignment diagnostics, filled by localization.
    pub masses: Vec<(usize, usize, T)>,
    pub ambiguous: bool,
}

impl<T: Real> DegreePackage<T> {
    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &EigenBranch<T>> {
        self.branches.iter().filter(move |b| b.label == Some(label))
    }

    /// The `c_q` branches of the package: zero branches first, then small ones by `λ(T)`.
    pub fn package(&self) -> Vec<&EigenBranch<T>> {
        let mut v: Vec<&EigenBranch<T>> = self.with_label(Label::Zero).collect();
        let mut vs: Vec<&EigenBranch<T>> = self.with_label(Label::VsPositive).collect();
        vs.sort_by(|a, b| a.last().lambda.partial_cmp(&b.last().lambda).unwrap());
        v.extend(vs);
        v
    }

    /// Package values at the first grid point (`t = 0` for a tracked package), ascending.
    pub fn values_at_start(&self) -> Vec<T> {
        let mut v: Vec<T> = self.package().iter().map(|b| b.first().lambda).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    pub fn branch(&self, id: usize) -> Option<&EigenBranch<T>> {
        self.branches.iter().find(|b| b.id == id)
    }
}

/// Package over all degrees together with the common grid.
#[derive(Debug, Clone)]
pub struct SpectralPackage<T: Real> {
    pub grid: Vec<T>,
    pub degrees: Vec<DegreePackage<T>>,
}

impl<T: Real> SpectralPackage<T> {
    pub fn degree(&self, q: usize) -> Option<&DegreePackage<T>> {
        self.degrees.iter().find(|d| d.q == q)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassSummary {
    pub q: usize,
    pub beta: usize,
    pub c: usize,
    pub zero: usize,
    pub vs_positive: usize,
    pub large: usize,
    pub gap: f64,
}

impl<T: Real> From<&DegreePackage<T>> for ClassSummary {
    fn from(d: &DegreePackage<T>) -> Self {
        Self {
            q: d.q,
            beta: d.beta,
            c: d.c,
            zero: d.with_label(Label::Zero).count(),
            vs_positive: d.with_label(Label::VsPositive).count(),
            large: d.with_label(Label::Large).count(),
            gap: to_f64(d.gap),
        }
    }
}

/// Labels `branches` of degree `q` given the Betti number and the number of
/// index-`q` critical points.
pub fn classify<T: Real>(
    mut branches: Vec<EigenBranch<T>>,
    beta: usize,
    c: usize,
    t_max: T,
    opts: &ClassifyOptions<T>,
) -> Result<DegreePackage<T>, SpectralError> {
    let q = branches.first().map(|b| b.q).unwrap_or(0);
    if c == 0 || c < beta {
        return Err(SpectralError::NoMorseData { q, c, beta });
    }
    if branches.len() < c {
        return Err(SpectralError::TooFewBranches { q, c, have: branches.len() });
    }
    let half = t_max * lit::<T>(0.5);
    let tm = to_f64(t_max);

    let is_zero = |b: &EigenBranch<T>| b.samples.iter().all(|s| s.lambda <= opts.tol_zero(s.lambda_max));
    let zero: Vec<usize> = (0..branches.len()).filter(|&i| is_zero(&branches[i])).collect();
    if zero.len() != beta {
        return Err(SpectralError::ZeroCountMismatch { q, expected: beta, found: zero.len() });
    }
    let mut rest: Vec<usize> = (0..branches.len()).filter(|i| !zero.contains(i)).collect();
    rest.sort_by(|&a, &b| branches[a].value_at(t_max).partial_cmp(&branches[b].value_at(t_max)).unwrap());
    let (vs, large) = rest.split_at(c - beta);

    for &i in vs {
        let (end, mid) = (branches[i].value_at(t_max), branches[i].value_at(half));
        if end > opts.decay_ratio * mid {
            return Err(SpectralError::GapNotFound {
                q,
                t_max: tm,
                reason: format!(
                    "branch {} does not decay (λ(T) = {:.3e}, λ(T/2) = {:.3e})",
                    branches[i].id,
                    to_f64(end),
                    to_f64(mid)
                ),
            });
        }
    }
    let lam_max_end = branches[0].last().lambda_max;
    let vs_max = vs
        .iter()
        .map(|&i| branches[i].value_at(t_max))
        .fold(opts.tol_zero(lam_max_end), |m, x| m.max(x));
    let gap = match large.first() {
        Some(&i) => branches[i].value_at(t_max) / vs_max,
        None => lit(f64::INFINITY),
    };
    if gap < opts.gap_min {
        return Err(SpectralError::GapNotFound {
            q,
            t_max: tm,
            reason: format!("gap ratio {:.3e} below {:.1}", to_f64(gap), to_f64(opts.gap_min)),
        });
    }

    let mut non_growing = Vec::new();
    for &i in large {
        if branches[i].value_at(t_max) <= branches[i].value_at(half) {
            non_growing.push(branches[i].id);
        }
    }
    for &i in &zero {
        branches[i].label = Some(Label::Zero);
    }
    for &i in vs {
        branches[i].label = Some(Label::VsPositive);
    }
    for &i in large {
        branches[i].label = Some(Label::Large);
    }
    Ok(DegreePackage { q, beta, c, t_max, branches, gap, non_growing, masses: Vec::new(), ambiguous: false })
}
