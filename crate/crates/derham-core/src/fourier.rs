//! Real Fourier basis on one circle factor.
//!
//! Signed mode `j` stands for `1` (j = 0), `cos jθ` (j > 0) or `sin |j|θ`
//! (j < 0). Positions are ordered `0, cos 1, sin 1, cos 2, sin 2, …` so the
//! basis for a smaller cutoff is a prefix of the basis for a larger one.
//! Matrices act on coefficient vectors of the normalized basis
//! `e_j = b_j / ‖b_j‖`.

use nalgebra::DMatrix;

use crate::{lit, Real};

/// Number of basis functions for cutoff `n`.
#[inline]
pub fn len(n: usize) -> usize {
    2 * n + 1
}

/// Signed mode stored at position `p`.
#[inline]
pub fn mode_of(p: usize) -> i32 {
    if p == 0 {
        0
    } else if p % 2 == 1 {
        p.div_ceil(2) as i32
    } else {
        -((p / 2) as i32)
    }
}

/// Position of signed mode `j`.
#[inline]
pub fn pos_of(j: i32) -> usize {
    match j {
        0 => 0,
        j if j > 0 => 2 * j as usize - 1,
        j => 2 * j.unsigned_abs() as usize,
    }
}

/// Squared L² norm of the unnormalized basis function `b_j` on `[0, 2π)`.
#[inline]
pub fn norm_sq(j: i32) -> f64 {
    if j == 0 {
        2.0 * std::f64::consts::PI
    } else {
        std::f64::consts::PI
    }
}

/// Normalization factor turning `b_j` into the unit vector `e_j`.
#[inline]
pub fn normalizer<T: Real>(j: i32) -> T {
    lit::<T>(1.0 / norm_sq(j).sqrt())
}

/// Unnormalized basis function `b_j(θ)`.
#[inline]
pub fn eval_raw<T: Real>(j: i32, theta: T) -> T {
    match j {
        0 => T::one(),
        j if j > 0 => (lit::<T>(j as f64) * theta).cos(),
        j => (lit::<T>(-j as f64) * theta).sin(),
    }
}

/// Values of all normalized basis functions for cutoff `n` at `θ`.
pub fn eval_basis<T: Real>(n: usize, theta: T) -> Vec<T> {
    (0..len(n))
        .map(|p| {
            let j = mode_of(p);
            normalizer::<T>(j) * eval_raw(j, theta)
        })
        .collect()
}

/// Derivative values of all normalized basis functions for cutoff `n` at `θ`.
pub fn eval_basis_deriv<T: Real>(n: usize, theta: T) -> Vec<T> {
    (0..len(n))
        .map(|p| {
            let j = mode_of(p);
            let (k, c) = deriv_raw(j);
            normalizer::<T>(j) * lit::<T>(c) * eval_raw(k, theta)
        })
        .collect()
}

/// `d/dθ b_j = c · b_k`, returned as `(k, c)`.
#[inline]
pub fn deriv_raw(j: i32) -> (i32, f64) {
    match j {
        0 => (0, 0.0),
        j if j > 0 => (-j, -(j as f64)),
        j => (-j, (-j) as f64),
    }
}

/// Product-to-sum expansion `b_a · b_b = Σ w_l b_l`, at most two terms.
pub fn product(a: i32, b: i32) -> Vec<(i32, f64)> {
    let (p, sa) = (a.unsigned_abs() as i32, a < 0);
    let (q, sb) = (b.unsigned_abs() as i32, b < 0);
    let diff = p - q;
    let sum = p + q;
    let mut out = Vec::with_capacity(2);
    let mut push = |mode: i32, w: f64| {
        if w != 0.0 {
            out.push((mode, w));
        }
    };
    // sin(x) for signed x: sin(-x) = -sin(x) and sin(0) = 0.
    let sin_term = |x: i32, w: f64| -> (i32, f64) {
        if x == 0 {
            (0, 0.0)
        } else if x > 0 {
            (-x, w)
        } else {
            (x, -w)
        }
    };
    match (sa, sb) {
        (false, false) => {
            push(diff.abs(), 0.5);
            push(sum, 0.5);
        }
        (true, true) => {
            push(diff.abs(), 0.5);
            push(sum, -0.5);
        }
        (true, false) => {
            let (m, w) = sin_term(sum, 0.5);
            push(m, w);
            let (m, w) = sin_term(diff, 0.5);
            push(m, w);
        }
        (false, true) => {
            let (m, w) = sin_term(sum, 0.5);
            push(m, w);
            let (m, w) = sin_term(-diff, 0.5);
            push(m, w);
        }
    }
    // Coincident modes appear when one factor is the constant.
    out.sort_by_key(|&(m, _)| m);
    out.dedup_by(|x, y| {
        if x.0 == y.0 {
            y.1 += x.1;
            true
        } else {
            false
        }
    });
    out.retain(|&(_, w)| w != 0.0);
    out
}

/// Inclusion of the cutoff-`from` space into the cutoff-`to` space
/// (a projection when `to < from`).
pub fn inclusion<T: Real>(from: usize, to: usize) -> DMatrix<T> {
    DMatrix::from_fn(len(to), len(from), |r, c| if r == c { T::one() } else { T::zero() })
}

/// Matrix of `d/dθ` from cutoff `from` into cutoff `to`.
pub fn deriv_matrix<T: Real>(from: usize, to: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(len(to), len(from));
    for c in 0..len(from) {
        let (k, w) = deriv_raw(mode_of(c));
        let r = pos_of(k);
        if w != 0.0 && r < len(to) {
            m[(r, c)] = lit(w);
        }
    }
    m
}

/// Matrix of multiplication by `Σ coef · b_j` from cutoff `from` into cutoff `to`.
pub fn mult_matrix<T: Real>(g: &[(i32, T)], from: usize, to: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(len(to), len(from));
    for &(gj, coef) in g {
        for c in 0..len(from) {
            let jc = mode_of(c);
            for (l, w) in product(gj, jc) {
                let r = pos_of(l);
                if r < len(to) {
                    // n_r · n_c · ‖b_l‖² with n = 1/‖b‖.
                    let scale = (norm_sq(l) / norm_sq(jc)).sqrt();
                    m[(r, c)] += coef * lit::<T>(w * scale);
                }
            }
        }
    }
    m
}
