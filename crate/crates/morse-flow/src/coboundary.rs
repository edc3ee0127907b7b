//! The Morse cochain complex `(C*, ∂*)` of a supported flow.
//!
//! On a circle factor `(∂c)(x) = c(right neighbour) − c(left neighbour)` for
//! every maximum `x`. Product complexes use the graded Leibniz rule
//! `∂(a ⊗ b) = ∂a ⊗ b + (−1)^{|a|} a ⊗ ∂b`, which is the sign convention
//! under which `Int*(t)` is a cochain map for cells oriented by increasing
//! angles.

use nalgebra::DMatrix;

use crate::cells::ProductFlow;
use crate::error::MorseError;

#[derive(Debug, Clone)]
pub struct MorseComplexData {
    /// Critical-point ids spanning `C^q`, per degree.
    pub basis: Vec<Vec<usize>>,
    /// Integer coboundaries `∂^q : C^q → C^{q+1}`, shape `c_{q+1} × c_q`.
    pub coboundary: Vec<DMatrix<i64>>,
    /// Cohomology ranks computed from the coboundaries.
    pub betti: Vec<usize>,
}

impl MorseComplexData {
    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    /// Whether every composite `∂^{q+1} ∂^q` vanishes exactly.
    pub fn is_complex(&self) -> bool {
        self.coboundary.windows(2).all(|w| (&w[1] * &w[0]).iter().all(|&x| x == 0))
    }

    /// Rows of `∂^q`, for export.
    pub fn rows(&self, q: usize) -> Vec<Vec<i64>> {
        self.coboundary[q].row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Coboundaries as real matrices.
    pub fn real_coboundary<T: derham_core::Real>(&self) -> Vec<DMatrix<T>> {
        self.coboundary.iter().map(|m| m.map(|x| derham_core::lit(x as f64))).collect()
    }
}

/// Rank over ℚ by fraction-free elimination.
pub fn integer_rank(m: &DMatrix<i64>) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<i128>> = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)] as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][col] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            if a[r][col] != 0 {
                let (x, y) = (a[rank][col], a[r][col]);
                for j in col..cols {
                    a[r][j] = a[r][j] * x - a[rank][j] * y;
                }
                let g = a[r].iter().fold(0i128, |g, &v| gcd(g, v.abs()));
                if g > 1 {
                    a[r].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub fn morse_coboundary(flow: &ProductFlow) -> Result<MorseComplexData, MorseError> {
    let n = flow.manifold.dim();
    let basis: Vec<Vec<usize>> = (0..=n).map(|q| flow.of_index(q).iter().map(|p| p.id).collect()).collect();
    let mut coboundary = Vec::with_capacity(n);
    for q in 0..n {
        let (src, dst) = (&basis[q], &basis[q + 1]);
        let mut m = DMatrix::<i64>::zeros(dst.len(), src.len());
        for (i, &y) in dst.iter().enumerate() {
            for (j, &x) in src.iter().enumerate() {
                m[(i, j)] = entry(flow, y, x);
            }
        }
        coboundary.push(m);
    }
    let mut betti = Vec::with_capacity(n + 1);
    for q in 0..=n {
        let out = if q < n { integer_rank(&coboundary[q]) } else { 0 };
        let inc = if q > 0 { integer_rank(&coboundary[q - 1]) } else { 0 };
        betti.push(basis[q].len() - out - inc);
    }
    let data = MorseComplexData { basis, coboundary, betti };
    for (q, (&rank, beta)) in data.betti.iter().zip(flow.manifold.betti()).enumerate() {
        if rank != beta {
            return Err(MorseError::RankMismatch { q, rank, beta });
        }
    }
    Ok(data)
}

/// `(∂ 1_x)(y)`: coefficient of `y` in the coboundary of the cochain dual to `x`.
fn entry(flow: &ProductFlow, y: usize, x: usize) -> i64 {
    let (fy, fx) = (&flow.factor_ids[y], &flow.factor_ids[x]);
    let mut total = 0;
    let mut degree_before = 0;
    for k in 0..fy.len() {
        let fl = &flow.factors[k];
        let others_equal = (0..fy.len()).all(|j| j == k || fy[j] == fx[j]);
        if others_equal && fl.points[fy[k]].index == fl.points[fx[k]].index + 1 {
            let sign = if degree_before % 2 == 0 { 1 } else { -1 };
            total += sign * fl.coboundary_entry(fy[k], fx[k]);
        }
        degree_before += fl.points[fx[k]].index;
    }
    total * flow.points[y].orientation as i64 * flow.points[x].orientation as i64
}
