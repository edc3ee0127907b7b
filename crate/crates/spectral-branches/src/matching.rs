//! One continuation step: assign tracked eigenvectors to the eigenpairs of a
//! neighbouring parameter value.
//!
//! Degenerate eigenvalue clusters carry no preferred basis, so overlaps with
//! a cluster are measured by projection norms (cosines of principal angles)
//! and the continued vectors are the Löwdin-orthonormalized projections.

use derham_core::{lit, Real};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::eig::EigenPairs;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOptions<T> {
    /// Relative gap below which eigenvalues are treated as one cluster.
    pub cluster_tol: T,
    /// Smallest acceptable overlap of a branch with its continuation.
    pub overlap_min: T,
}

impl<T: Real> Default for MatchOptions<T> {
    fn default() -> Self {
        Self { cluster_tol: lit(1e-6), overlap_min: lit(0.9) }
    }
}

/// Cluster threshold for an eigenvalue of size `lambda`.
#[inline]
pub fn cluster_gap<T: Real>(tol: T, lambda: T) -> T {
    tol * (T::one() + lambda.abs())
}

/// Groups indices whose values are chained by gaps below the cluster threshold.
/// Groups are ordered by value, members by value.
pub fn clusters<T: Real>(values: &[T], tol: T) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match out.last_mut() {
            Some(g) if values[i] - values[*g.last().unwrap()] <= cluster_gap(tol, values[i]) => g.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Result of one matching step.
#[derive(Debug, Clone)]
pub struct StepMatch<T: Real> {
    /// Index of the next eigenpair (in the resolved window) taken by each branch.
    pub assignment: Vec<usize>,
    /// Sign applied to the next eigenvector (meaningful for non-degenerate targets).
    pub signs: Vec<T>,
    /// Overlap of each (possibly rotated) previous vector with its continuation.
    pub overlaps: Vec<T>,
    /// Continued unit vectors, one column per branch.
    pub vectors: DMatrix<T>,
    /// Rayleigh values of the continued vectors.
    pub values: Vec<T>,
    /// Rotations applied inside degenerate clusters of the previous step:
    /// branch indices and the orthogonal matrix `R` with `P_new = P_old R`.
    pub rotations: Vec<(Vec<usize>, DMatrix<T>)>,
}

impl<T: Real> StepMatch<T> {
    pub fn min_overlap(&self) -> T {
        self.overlaps.iter().fold(T::one(), |m, &x| m.min(x))
    }
}

/// Window of next eigenpairs after splitting degenerate clusters with the
/// derivative of the family (first-order perturbation directions).
#[derive(Debug, Clone)]
pub struct ResolvedWindow<T: Real> {
    pub vectors: DMatrix<T>,
    pub values: Vec<T>,
    pub groups: Vec<Vec<usize>>,
}

pub fn resolve_window<T: Real>(next: &EigenPairs<T>, deriv: Option<&DMatrix<T>>, tol: T) -> ResolvedWindow<T> {
    let mut vectors = next.vectors.clone();
    let mut values = next.values.clone();
    let mut groups = Vec::new();
    for g in clusters(&next.values, tol) {
        if g.len() == 1 || deriv.is_none() {
            groups.push(g);
            continue;
        }
        let d = deriv.unwrap();
        let qh = DMatrix::from_fn(vectors.nrows(), g.len(), |r, c| next.vectors[(r, g[c])]);
        let b = qh.transpose() * d * &qh;
        let b = (&b + b.transpose()) * lit::<T>(0.5);
        let eig = SymmetricEigen::new(b);
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[c]).unwrap());
        let u = DMatrix::from_fn(g.len(), g.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        let rotated = &qh * &u;
        for (c, &col) in g.iter().enumerate() {
            vectors.set_column(col, &rotated.column(c));
            let mut lam = T::zero();
            for r in 0..g.len() {
                lam += u[(r, c)] * u[(r, c)] * next.values[g[r]];
            }
            values[col] = lam;
        }
        let bvals: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let bscale = bvals.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let mut sub: Vec<usize> = vec![g[0]];
        for c in 1..g.len() {
            if bvals[c] - bvals[c - 1] <= tol * (T::one() + bscale) {
                sub.push(g[c]);
            } else {
                groups.push(std::mem::take(&mut sub));
                sub.push(g[c]);
            }
        }
        groups.push(sub);
    }
    ResolvedWindow { vectors, values, groups }
}

fn polar<T: Real>(c: &DMatrix<T>) -> DMatrix<T> {
    let svd = c.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// `X (XᵀX)^{-1/2}`.
fn lowdin<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    let s = x.transpose() * x;
    let eig = SymmetricEigen::new((&s + s.transpose()) * lit::<T>(0.5));
    let floor = lit::<T>(1e-300);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| T::one() / l.max(floor).sqrt()));
    x * (&eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose())
}

/// Matches tracked vectors `prev` (columns, with values) to the resolved window.
pub fn match_resolved<T: Real>(
    prev_vectors: &DMatrix<T>,
    prev_values: &[T],
    next: &ResolvedWindow<T>,
    opts: &MatchOptions<T>,
) -> StepMatch<T> {
    let k = prev_vectors.ncols();
    let m = next.vectors.ncols();
    assert!(k <= m, "window smaller than the number of branches");
    let q = &next.vectors;
    let mut p = prev_vectors.clone();
    let mut o = p.transpose() * q;

    let prev_groups = clusters(prev_values, opts.cluster_tol);
    let mut gid = vec![0; k];
    for (g, members) in prev_groups.iter().enumerate() {
        for &i in members {
            gid[i] = g;
        }
    }
    let mut hid = vec![0; m];
    for (h, members) in next.groups.iter().enumerate() {
        for &j in members {
            hid[j] = h;
        }
    }
    let mut f = DMatrix::<T>::zeros(prev_groups.len(), next.groups.len());
    for i in 0..k {
        for j in 0..m {
            f[(gid[i], hid[j])] += o[(i, j)] * o[(i, j)];
        }
    }
    let scale = 1e12;
    let weights: Vec<i64> = (0..k)
        .flat_map(|i| {
            let (g, o, f, hid, next, prev_groups) = (gid[i], &o, &f, &hid, next, &prev_groups);
            (0..m).map(move |j| {
                let h = hid[j];
                let denom = prev_groups[g].len().min(next.groups[h].len()) as f64;
                let w = (derham_core::to_f64(f[(g, h)]) / denom).sqrt() + 1e-3 * derham_core::to_f64(o[(i, j)].abs());
                (w * scale).round() as i64
            })
        })
        .collect();
    let wm = Matrix::from_vec(k, m, weights).expect("weight matrix shape");
    let (_, assignment) = kuhn_munkres(&wm);

    let project = |h: usize, v: &DVector<T>| -> DVector<T> {
        let cols = &next.groups[h];
        let mut out = DVector::zeros(v.len());
        for &j in cols {
            let c = q.column(j).dot(v);
            out.axpy(c, &q.column(j), T::one());
        }
        out
    };
    let single_overlap = |o: &DMatrix<T>, p: &DMatrix<T>, i: usize| -> T {
        let j = assignment[i];
        let h = hid[j];
        if next.groups[h].len() == 1 {
            o[(i, j)].abs()
        } else {
            project(h, &p.column(i).into_owned()).norm()
        }
    };

    // Rotate degenerate previous clusters when individual continuation fails.
    let mut rotations = Vec::new();
    for members in prev_groups.iter().filter(|g| g.len() > 1) {
        let worst = members.iter().map(|&i| single_overlap(&o, &p, i)).fold(T::one(), |a, b| a.min(b));
        if worst >= opts.overlap_min {
            continue;
        }
        let pg = DMatrix::from_fn(p.nrows(), members.len(), |r, c| p[(r, members[c])]);
        let mut y = DMatrix::zeros(p.nrows(), members.len());
        for (c, &i) in members.iter().enumerate() {
            let j = assignment[i];
            let h = hid[j];
            let target = if next.groups[h].len() == 1 {
                let s = if o[(i, j)] >= T::zero() { T::one() } else { -T::one() };
                q.column(j) * s
            } else {
                project(h, &p.column(i).into_owned())
            };
            y.set_column(c, &target);
        }
        let r = polar(&(pg.transpose() * y));
        let rotated = &pg * &r;
        for (c, &i) in members.iter().enumerate() {
            p.set_column(i, &rotated.column(c));
        }
        rotations.push((members.clone(), r));
    }
    if !rotations.is_empty() {
        o = p.transpose() * q;
    }

    let mut vectors = DMatrix::zeros(p.nrows(), k);
    let mut signs = vec![T::one(); k];
    for (h, cols) in next.groups.iter().enumerate() {
        let inc: Vec<usize> = (0..k).filter(|&i| hid[assignment[i]] == h).collect();
        if inc.is_empty() {
            continue;
        }
        if cols.len() == 1 {
            let i = inc[0];
            let j = cols[0];
            let s = if o[(i, j)] >= T::zero() { T::one() } else { -T::one() };
            signs[i] = s;
            vectors.set_column(i, &(q.column(j) * s));
        } else {
            let x = DMatrix::from_fn(p.nrows(), inc.len(), |_, _| T::zero());
            let mut x = x;
            for (c, &i) in inc.iter().enumerate() {
                x.set_column(c, &project(h, &p.column(i).into_owned()));
            }
            let ortho = lowdin(&x);
            for (c, &i) in inc.iter().enumerate() {
                vectors.set_column(i, &ortho.column(c));
            }
        }
    }

    let mut overlaps = vec![T::zero(); k];
    let mut values = vec![T::zero(); k];
    for i in 0..k {
        let v = vectors.column(i);
        overlaps[i] = p.column(i).dot(&v).abs();
        let h = hid[assignment[i]];
        let mut lam = T::zero();
        for &j in &next.groups[h] {
            let c = q.column(j).dot(&v);
            lam += c * c * next.values[j];
        }
        values[i] = lam;
    }
    StepMatch { assignment, signs, overlaps, vectors, values, rotations }
}

/// Matches two sets of eigenpairs without derivative information.
pub fn match_step<T: Real>(prev: &EigenPairs<T>, next: &EigenPairs<T>, opts: &MatchOptions<T>) -> StepMatch<T> {
    let window = resolve_window(next, None, opts.cluster_tol);
    match_resolved(&prev.vectors, &prev.values, &window, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_group_close_values() {
        let g = clusters(&[1.0, 0.0, 1.0 + 1e-9, 3.0], 1e-6);
        assert_eq!(g, vec![vec![1], vec![0, 2], vec![3]]);
    }

    #[test]
    fn lowdin_orthonormalizes() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, 0.1, 1.0, 0.0, 0.3]);
        let y = lowdin(&x);
        assert!((y.transpose() * &y - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
    }
}
