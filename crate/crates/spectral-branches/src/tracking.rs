//! Continuation of eigenpairs of a symmetric matrix family `A(t)`.
//!
//! Branches are seeded by the `k` lowest eigenpairs at the right end of the
//! grid and continued towards smaller `t`. A step is accepted when every
//! branch keeps an overlap of at least `overlap_min` with its continuation
//! and no two branches exchange order through a coupled (avoided) crossing;
//! otherwise the step is bisected.

use std::collections::HashMap;

use derham_core::{lit, to_f64, DeRhamComplex, Real};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eig::{eig_sym, EigenPairs, EigenScalar};
use crate::error::SpectralError;
use crate::matching::{clusters, cluster_gap, match_resolved, resolve_window, MatchOptions, ResolvedWindow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions<T> {
    pub matching: MatchOptions<T>,
    /// Smallest bisection step.
    pub h_min: T,
    /// Relative coupling above which an order exchange is treated as avoided.
    pub coupling_tol: T,
    /// Number of eigenpairs considered for continuation; default `min(dim, 2k + 10)`.
    pub window: Option<usize>,
}

impl<T: Real> Default for TrackOptions<T> {
    fn default() -> Self {
        Self { matching: MatchOptions::default(), h_min: lit(1e-6), coupling_tol: lit(1e-7), window: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Zero,
    VsPositive,
    Large,
}

#[derive(Debug, Clone)]
pub struct Sample<T: Real> {
    pub t: T,
    pub lambda: T,
    pub vector: DVector<T>,
    /// Overlap with the neighbouring sample at larger `t` (1 at the seed).
    pub overlap: T,
    /// Largest eigenvalue of the full matrix at `t`, used for kernel tolerances.
    pub lambda_max: T,
}

/// One analytic eigenvalue branch sampled on a (refined) grid, increasing in `t`.
#[derive(Debug, Clone)]
pub struct EigenBranch<T: Real> {
    pub q: usize,
    pub id: usize,
    pub samples: Vec<Sample<T>>,
    pub label: Option<Label>,
    pub critical_point: Option<usize>,
    /// Parameter intervals where an order exchange was accepted at the minimal step.
    pub crossings: Vec<(T, T)>,
}

impl<T: Real> EigenBranch<T> {
    pub fn ts(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.lambda).collect()
    }

    pub fn first(&self) -> &Sample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("branch has samples")
    }

    pub fn min_overlap(&self) -> T {
        self.samples.iter().fold(T::one(), |m, s| m.min(s.overlap))
    }

    /// Sample at `t` if it lies on the refined grid.
    pub fn sample_at(&self, t: T) -> Option<&Sample<T>> {
        let tol = lit::<T>(1e-12) * (T::one() + t.abs());
        self.samples.iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// Value at `t`, linearly interpolated between neighbouring samples.
    pub fn value_at(&self, t: T) -> T {
        if let Some(s) = self.sample_at(t) {
            return s.lambda;
        }
        let i = self.samples.partition_point(|s| s.t < t);
        if i == 0 {
            return self.samples[0].lambda;
        }
        if i >= self.samples.len() {
            return self.last().lambda;
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let w = (t - a.t) / (b.t - a.t);
        a.lambda + (b.lambda - a.lambda) * w
    }
}

/// Grid `0, h, 2h, …, t_max` with `t_max/2` and `t_max` always included.
pub fn uniform_grid<T: Real>(t_max: T, step: T) -> Vec<T> {
    let n = (to_f64(t_max) / to_f64(step)).ceil().max(1.0) as usize;
    let mut g: Vec<T> = (0..=n).map(|i| (step * lit::<T>(i as f64)).min(t_max)).collect();
    g.push(t_max * lit::<T>(0.5));
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = lit::<T>(1e-12) * (T::one() + t_max);
    g.dedup_by(|a, b| (*a - *b).abs() <= tol);
    g
}

struct Solved<T: Real> {
    window: ResolvedWindow<T>,
    lambda_max: T,
}

fn key<T: Real>(t: T) -> u64 {
    to_f64(t).to_bits()
}

/// Tracks `k` branches of the family `a(t)` with derivative `da(t)` over `grid`.
pub fn track_family<T, F, G>(
    a: F,
    da: G,
    grid: &[T],
    k: usize,
    opts: &TrackOptions<T>,
) -> Result<Vec<EigenBranch<T>>, SpectralError>
where
    T: EigenScalar,
    F: Fn(T) -> DMatrix<T>,
    G: Fn(T) -> DMatrix<T>,
{
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectralError::InvalidGrid);
    }
    let t_end = *grid.last().unwrap();
    let dim = a(t_end).nrows();
    if k == 0 || k > dim {
        return Err(SpectralError::TooManyBranches { k, dim });
    }
    let base_window = opts.window.unwrap_or((2 * k + 10).min(dim)).max(k).min(dim);
    let tol = opts.matching.cluster_tol;

    let solve = |t: T| -> Result<Solved<T>, SpectralError> {
        let m = a(t);
        let full = eig_sym(&m, None)?;
        let lambda_max = *full.values.last().unwrap();
        let mut w = base_window;
        while w < dim && full.values[w] - full.values[w - 1] <= cluster_gap(tol, full.values[w]) {
            w += 1;
        }
        let pairs: EigenPairs<T> = full.truncate(w);
        let d = da(t);
        Ok(Solved { window: resolve_window(&pairs, Some(&d), tol), lambda_max })
    };

    let seed = solve(t_end)?;
    let mut p = seed.window.vectors.columns(0, k).into_owned();
    let mut vals: Vec<T> = seed.window.values[..k].to_vec();
    let mut hist: Vec<Vec<Sample<T>>> = (0..k)
        .map(|i| {
            vec![Sample {
                t: t_end,
                lambda: vals[i],
                vector: p.column(i).into_owned(),
                overlap: T::one(),
                lambda_max: seed.lambda_max,
            }]
        })
        .collect();
    let mut crossings: Vec<Vec<(T, T)>> = vec![Vec::new(); k];

    let mut cache: HashMap<u64, Solved<T>> = HashMap::new();
    let mut cur = t_end;
    for &target in grid.iter().rev().skip(1) {
        let mut stack = vec![target];
        while let Some(&tb) = stack.last() {
            let solved = match cache.remove(&key(tb)) {
                Some(s) => s,
                None => solve(tb)?,
            };
            let step = match_resolved(&p, &vals, &solved.window, &opts.matching);
            let h = (cur - tb).abs();
            let overlap_ok = step.min_overlap() >= opts.matching.overlap_min;

            // Order exchanges between clearly separated branches.
            let mut coupled = Vec::new();
            if overlap_ok {
                let mut exchanges = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        let before = vals[i] + cluster_gap(tol, vals[i]) < vals[j];
                        let after = step.values[i] > step.values[j] + cluster_gap(tol, step.values[j]);
                        if before && after {
                            exchanges.push((i, j));
                        }
                    }
                }
                if !exchanges.is_empty() {
                    let a_cur = a(cur);
                    let a_next = a(tb);
                    let scale = T::one() + a_next.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
                    for &(i, j) in &exchanges {
                        let c1 = (p.column(i).transpose() * &a_next * p.column(j))[(0, 0)].abs();
                        let vi = step.vectors.column(i);
                        let vj = step.vectors.column(j);
                        let c2 = (vi.transpose() * &a_cur * vj)[(0, 0)].abs();
                        if c1.max(c2) > opts.coupling_tol * scale {
                            coupled.push((i, j));
                        }
                    }
                }
            }

            if overlap_ok && (coupled.is_empty() || h <= opts.h_min) {
                for &(i, j) in &coupled {
                    crossings[i].push((tb, cur));
                    crossings[j].push((tb, cur));
                }
                // Re-express earlier samples of rotated clusters in the new frame.
                for (members, r) in &step.rotations {
                    let mut s = hist[members[0]].len();
                    while s > 0 {
                        s -= 1;
                        let lam: Vec<T> = members.iter().map(|&i| hist[i][s].lambda).collect();
                        if clusters(&lam, tol).len() != 1 {
                            break;
                        }
                        let old: Vec<DVector<T>> = members.iter().map(|&i| hist[i][s].vector.clone()).collect();
                        for (c, &i) in members.iter().enumerate() {
                            let mut v = DVector::zeros(old[0].len());
                            let mut l = T::zero();
                            for (b, ob) in old.iter().enumerate() {
                                v.axpy(r[(b, c)], ob, T::one());
                                l += r[(b, c)] * r[(b, c)] * lam[b];
                            }
                            hist[i][s].vector = v;
                            hist[i][s].lambda = l;
                        }
                    }
                }
                for i in 0..k {
                    hist[i].push(Sample {
                        t: tb,
                        lambda: step.values[i],
                        vector: step.vectors.column(i).into_owned(),
                        overlap: step.overlaps[i],
                        lambda_max: solved.lambda_max,
                    });
                }
                p = step.vectors;
                vals = step.values;
                cur = tb;
                stack.pop();
                continue;
            }
            if h <= opts.h_min {
                return Err(SpectralError::Unresolvable {
                    t_from: to_f64(tb),
                    t_to: to_f64(cur),
                    overlap: to_f64(step.min_overlap()),
                });
            }
            cache.insert(key(tb), solved);
            stack.push((cur + tb) * lit::<T>(0.5));
        }
    }

    Ok(hist
        .into_iter()
        .zip(crossings)
        .enumerate()
        .map(|(id, (mut samples, crossings))| {
            samples.reverse();
            EigenBranch { q: 0, id, samples, label: None, critical_point: None, crossings }
        })
        .collect())
}

/// Tracks the `k` lowest branches (at the last grid point) of `Δ^q(t)`.
pub fn track_branches<T: EigenScalar>(
    c: &DeRhamComplex<T>,
    q: usize,
    grid: &[T],
    k: usize,
    opts: &TrackOptions<T>,
) -> Result<Vec<EigenBranch<T>>, SpectralError> {
    if grid.first() != Some(&T::zero()) {
        return Err(SpectralError::InvalidGrid);
    }
    c.witten_laplacian(q, T::zero())?;
    let mut out = track_family(
        |t| c.witten_laplacian(q, t).expect("degree checked"),
        |t| c.laplacian_derivative(q, t).expect("degree checked"),
        grid,
        k,
        opts,
    )?;
    for b in &mut out {
        b.q = q;
    }
    Ok(out)
}
