//! Integer lattices attached to an integral cochain complex.
//!
//! For a complex of free abelian groups with torsion-free cohomology, the
//! integral classes `H^q_ℤ = Z^q_ℤ / B^q_ℤ` form a lattice in the harmonic
//! space whose covolume is `covol(Z^q_ℤ) / covol(B^q_ℤ)`. These covolumes
//! relate the torsion of the standard-metric complex to the combinatorial
//! Reidemeister torsion.

use nalgebra::DMatrix;

/// Column-reduces `a` over its first `pivot_rows` rows using unimodular
/// column operations. Returns the reduced matrix and the number of pivot
/// columns; the remaining columns vanish on the pivot rows.
fn column_echelon(mut a: Vec<Vec<i128>>, pivot_rows: usize) -> (Vec<Vec<i128>>, usize) {
    let cols = a.first().map_or(0, Vec::len);
    let mut p = 0;
    for r in 0..pivot_rows {
        if p == cols {
            break;
        }
        loop {
            let nz: Vec<usize> = (p..cols).filter(|&j| a[r][j] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    for row in a.iter_mut() {
                        row.swap(p, j);
                    }
                    if a[r][p] < 0 {
                        a.iter_mut().for_each(|row| row[p] = -row[p]);
                    }
                    p += 1;
                }
                break;
            }
            let &piv = nz.iter().min_by_key(|&&j| a[r][j].abs()).unwrap();
            for &j in nz.iter().filter(|&&j| j != piv) {
                let q = a[r][j].div_euclid(a[r][piv]);
                for row in a.iter_mut() {
                    row[j] -= q * row[piv];
                }
            }
        }
    }
    (a, p)
}

fn to_rows(m: &DMatrix<i64>) -> Vec<Vec<i128>> {
    m.row_iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

fn from_cols(a: &[Vec<i128>], rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DMatrix<i64> {
    let (r0, c0) = (rows.start, cols.start);
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[r0 + i][c0 + j] as i64)
}

/// Basis (as columns) of the lattice `ker m ∩ ℤ^n`.
pub fn integer_kernel(m: &DMatrix<i64>) -> DMatrix<i64> {
    let (rows, cols) = m.shape();
    let mut a = to_rows(m);
    for i in 0..cols {
        a.push((0..cols).map(|j| i128::from(i == j)).collect());
    }
    let (a, p) = column_echelon(a, rows);
    from_cols(&a, rows..rows + cols, p..cols)
}

/// Basis (as columns) of the lattice generated by the columns of `m`.
pub fn image_basis(m: &DMatrix<i64>) -> DMatrix<i64> {
    let rows = m.nrows();
    let (a, p) = column_echelon(to_rows(m), rows);
    from_cols(&a, 0..rows, 0..p)
}

/// Nonzero invariant factors of `m` (its Smith normal form diagonal).
pub fn invariant_factors(m: &DMatrix<i64>) -> Vec<i128> {
    let mut a = to_rows(m);
    let (rows, cols) = m.shape();
    let mut out = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        let Some((pi, pj)) = (k..rows)
            .flat_map(|i| (k..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(k, pi);
        a.iter_mut().for_each(|row| row.swap(k, pj));
        let mut clean = true;
        for i in k + 1..rows {
            let q = a[i][k].div_euclid(a[k][k]);
            for j in k..cols {
                a[i][j] -= q * a[k][j];
            }
            clean &= a[i][k] == 0;
        }
        for j in k + 1..cols {
            let q = a[k][j].div_euclid(a[k][k]);
            for row in a.iter_mut().skip(k) {
                row[j] -= q * row[k];
            }
            clean &= a[k][j] == 0;
        }
        if !clean {
            continue;
        }
        // The pivot must divide the rest of the block.
        if let Some(i) = (k + 1..rows).find(|&i| (k + 1..cols).any(|j| a[i][j] % a[k][k] != 0)) {
            for j in k..cols {
                let v = a[i][j];
                a[k][j] += v;
            }
            continue;
        }
        out.push(a[k][k].abs());
        k += 1;
    }
    out
}

/// `½ log det(Bᵀ B)` for a lattice basis `B`.
pub fn log_covolume(basis: &DMatrix<i64>) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    let b = basis.map(|x| x as f64);
    0.5 * (b.transpose() * b).determinant().ln()
}

/// Per-degree `log covol(H^q_ℤ)` for an integral complex with coboundaries
/// `d[q] : ℤ^{c_q} → ℤ^{c_{q+1}}` and the standard inner product.
/// Returns `None` when some integral cohomology group has torsion.
pub fn cohomology_log_covolumes(d: &[DMatrix<i64>], dims: &[usize]) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(dims.len());
    for q in 0..dims.len() {
        if q > 0 && invariant_factors(&d[q - 1]).iter().any(|&f| f != 1) {
            return None;
        }
        let z = if q < d.len() { integer_kernel(&d[q]) } else { DMatrix::identity(dims[q], dims[q]) };
        let b = if q > 0 { image_basis(&d[q - 1]) } else { DMatrix::zeros(dims[q], 0) };
        out.push(log_covolume(&z) - log_covolume(&b));
    }
    Some(out)
}
