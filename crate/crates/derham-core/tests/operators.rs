use std::f64::consts::PI;

use derham_core::fourier::{self, eval_basis, len, pos_of};
use derham_core::{check_duality_identities, DeRhamComplex, Manifold, TrigPoly};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sorted_eigs(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn amax(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

#[test]
fn circle_flat_spectrum_is_squares() {
    let c = DeRhamComplex::circle(8, TrigPoly::sin2()).unwrap();
    let ev = sorted_eigs(&c.witten_laplacian(0, 0.0).unwrap());
    assert!(ev[0].abs() < 1e-12);
    for n in 1..=8usize {
        let want = (n * n) as f64;
        assert!((ev[2 * n - 1] - want).abs() < 1e-9);
        assert!((ev[2 * n] - want).abs() < 1e-9);
    }
}

#[test]
fn zero_function_gives_no_deformation() {
    let c = DeRhamComplex::circle(4, TrigPoly::zero(1)).unwrap();
    assert_eq!(amax(c.e_matrix(0).unwrap()), 0.0);
    for t in [0.5, 3.0, -2.0] {
        let diff = c.witten_laplacian(0, t).unwrap() - c.witten_laplacian(0, 0.0).unwrap();
        assert_eq!(amax(&diff), 0.0);
    }
}

/// Galerkin matrix of `-∂² + 4t sin 2θ + 4t² cos² 2θ` by trapezoidal collocation.
fn collocation_oracle(n: usize, t: f64) -> DMatrix<f64> {
    let m = 8 * n + 16;
    let dim = len(n);
    let mut out = DMatrix::zeros(dim, dim);
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        let w = 2.0 * PI / m as f64;
        let v = 4.0 * t * (2.0 * th).sin() + 4.0 * t * t * (2.0 * th).cos().powi(2);
        let b = eval_basis::<f64>(n, th);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += w * b[i] * v * b[j];
            }
        }
    }
    for p in 0..dim {
        let j = fourier::mode_of(p) as f64;
        out[(p, p)] += j * j;
    }
    out
}

#[test]
fn circle_laplacian_matches_collocation_oracle() {
    let c = DeRhamComplex::circle(8, TrigPoly::sin2()).unwrap();
    for t in [1.0, 2.5] {
        let diff = c.witten_laplacian(0, t).unwrap() - collocation_oracle(8, t);
        assert!(amax(&diff) < 1e-12, "t={t}: {}", amax(&diff));
    }
}

#[test]
fn witten_d_of_constant_is_df() {
    let c = DeRhamComplex::circle(8, TrigPoly::sin2()).unwrap();
    let mut one = DVector::zeros(len(8));
    one[0] = (2.0 * PI).sqrt();
    let img = c.witten_d(0, 1.0).unwrap() * one;
    // 2 cos 2θ = 2√π e₂.
    let mut want = DVector::zeros(len(8));
    want[pos_of(2)] = 2.0 * PI.sqrt();
    assert!((img - want).amax() < 1e-13);
    assert_eq!(c.witten_d(0, 0.0).unwrap(), *c.d_matrix(0).unwrap());
}

#[test]
fn torus_differentials_compose_to_zero_on_low_modes() {
    let c = DeRhamComplex::torus(7, TrigPoly::sin2_product()).unwrap();
    assert_eq!(amax(&(c.d_matrix(1).unwrap() * c.d_matrix(0).unwrap())), 0.0);
    // Functions with modes up to N - maxfreq stay inside the cutoff under d(t).
    let low: Vec<usize> = (0..c.dims()[0])
        .filter(|&i| {
            let (a, b) = (i / len(7), i % len(7));
            fourier::mode_of(a).unsigned_abs() <= 5 && fourier::mode_of(b).unsigned_abs() <= 5
        })
        .collect();
    for t in [0.0, 1.0, 5.0] {
        let dd = c.witten_d(1, t).unwrap() * c.witten_d(0, t).unwrap();
        let res = low.iter().map(|&j| dd.column(j).amax()).fold(0.0, f64::max);
        assert!(res <= 1e-10 * (1.0 + t * t), "t={t}: {res}");
    }
}

#[test]
fn laplacian_is_quadratic_in_t() {
    for c in [
        DeRhamComplex::circle(8, TrigPoly::sin2()).unwrap(),
        DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap(),
    ] {
        for q in 0..=c.n() {
            let l0 = c.witten_laplacian(q, 0.0).unwrap();
            let lp = c.witten_laplacian(q, 1.0).unwrap();
            let lm = c.witten_laplacian(q, -1.0).unwrap();
            for t in [0.3, 2.0, 7.0] {
                let recon = &l0 + (&lp - &lm) * (t / 2.0) + ((&lp + &lm) * 0.5 - &l0) * (t * t);
                let res = amax(&(c.witten_laplacian(q, t).unwrap() - recon));
                assert!(res <= 1e-12 * (1.0 + t * t) * amax(&lp), "q={q} t={t}: {res}");
            }
        }
    }
}

#[test]
fn undeformed_laplacian_is_diagonal() {
    let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
    for q in 0..=2 {
        let l = c.witten_laplacian(q, 0.0).unwrap();
        let off = l.clone() - DMatrix::from_diagonal(&l.diagonal());
        assert_eq!(amax(&off), 0.0);
    }
}

#[test]
fn basis_is_orthonormal() {
    // Gram matrix by exact trapezoidal quadrature (exact for these degrees).
    let n = 6;
    let m = 4 * n + 4;
    let mut g = DMatrix::<f64>::zeros(len(n), len(n));
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        let b = DVector::from_vec(eval_basis::<f64>(n, th));
        g += &b * b.transpose() * (2.0 * PI / m as f64);
    }
    assert!((g - DMatrix::identity(len(n), len(n))).amax() < 1e-13);
}

#[test]
fn dims_follow_binomials() {
    let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
    assert_eq!(c.dims(), &[169, 338, 169]);
    assert_eq!(c.betti(), vec![1, 2, 1]);
    let c = DeRhamComplex::<f64>::circle(8, TrigPoly::sin2()).unwrap();
    assert_eq!(c.dims(), &[17, 17]);
}

#[test]
fn torus_flat_spectrum_begins_with_four_ones() {
    // Smallest admissible cutoff for sin 2θ₁ + sin 2θ₂ is 6.
    let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
    let ev = sorted_eigs(&c.witten_laplacian(0, 0.0).unwrap());
    let want = [0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 4.0];
    for (a, b) in ev.iter().zip(want) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn torus_one_form_spectrum_doubles_scalar_spectrum() {
    let n = 4;
    let c = DeRhamComplex::torus(n, TrigPoly::zero(2)).unwrap();
    let ev1 = sorted_eigs(&c.witten_laplacian(1, 0.0).unwrap());
    let mut want = Vec::new();
    for a in 0..len(n) {
        for b in 0..len(n) {
            let (j, k) = (fourier::mode_of(a) as f64, fourier::mode_of(b) as f64);
            want.push(j * j + k * k);
            want.push(j * j + k * k);
        }
    }
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in ev1.iter().zip(&want) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn separable_torus_spectrum_is_tensor_sum() {
    let n = 6;
    let h = TrigPoly::<f64>::sin2();
    let circle = DeRhamComplex::circle(n, h.clone()).unwrap();
    let torus = DeRhamComplex::torus(n, TrigPoly::sin2_product()).unwrap();
    for t in [0.0, 0.7, 2.0] {
        let mu0 = sorted_eigs(&circle.witten_laplacian(0, t).unwrap());
        let mu1 = sorted_eigs(&circle.witten_laplacian(1, t).unwrap());
        let sums = |a: &[f64], b: &[f64]| {
            let mut s: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s
        };
        let check = |got: Vec<f64>, want: Vec<f64>| {
            assert_eq!(got.len(), want.len());
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "t={t}: {a} vs {b}");
            }
        };
        check(sorted_eigs(&torus.witten_laplacian(0, t).unwrap()), sums(&mu0, &mu0));
        let mut w1 = sums(&mu1, &mu0);
        w1.extend(sums(&mu0, &mu1));
        w1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        check(sorted_eigs(&torus.witten_laplacian(1, t).unwrap()), w1);
        check(sorted_eigs(&torus.witten_laplacian(2, t).unwrap()), sums(&mu1, &mu1));
    }
}

#[test]
fn hodge_star_conventions() {
    let c = DeRhamComplex::<f64>::circle(6, TrigPoly::sin2()).unwrap();
    let s0 = c.hodge_star(0).unwrap();
    assert_eq!(*s0, DMatrix::identity(13, 13));
    assert_eq!(c.hodge_star(1).unwrap() * s0, DMatrix::identity(13, 13));

    let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
    let s1 = c.hodge_star(1).unwrap();
    let dtheta1 = DVector::from_vec(c.coordinate_form(1, 0));
    let dtheta2 = DVector::from_vec(c.coordinate_form(1, 1));
    assert_eq!(s1 * &dtheta1, dtheta2);
    assert_eq!(s1 * &dtheta2, -dtheta1);
    assert_eq!(s1 * s1, -DMatrix::<f64>::identity(338, 338));
}

#[test]
fn hodge_star_is_an_isometry() {
    let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in 0..=2 {
        let w = DVector::from_fn(c.dims()[q], |_, _| rng.random::<f64>() - 0.5);
        let sw = c.hodge_star(q).unwrap() * &w;
        assert!((w.norm_squared() - sw.norm_squared()).abs() < 1e-12);
    }
}

#[test]
fn duality_trivial_for_zero_function() {
    let c = DeRhamComplex::torus(4, TrigPoly::zero(2)).unwrap();
    for q in 0..=2 {
        for t in [0.0, 1.0, 3.0] {
            let r = check_duality_identities(&c, &c, q, t).unwrap();
            assert!(r.max() <= 1e-12, "{r:?}");
        }
    }
}

#[test]
fn duality_on_torus_example() {
    let f = TrigPoly::sin2_product();
    let c = DeRhamComplex::torus(6, f.clone()).unwrap();
    let cn = DeRhamComplex::torus(6, f.neg()).unwrap();
    let r = check_duality_identities(&c, &cn, 0, 2.0).unwrap();
    assert!(r.max() <= 1e-10, "{r:?}");
}

#[test]
fn reflection_identity_on_circle() {
    let f = TrigPoly::sin2();
    let c = DeRhamComplex::circle(8, f.clone()).unwrap();
    let cn = DeRhamComplex::circle(8, f.neg()).unwrap();
    let a = c.witten_laplacian(0, -3.0).unwrap();
    let b = cn.witten_laplacian(0, 3.0).unwrap();
    assert!(amax(&(a - b)) <= 1e-12);
}

#[test]
fn duality_rejects_mismatched_inputs() {
    let f = TrigPoly::sin2();
    let c = DeRhamComplex::circle(8, f.clone()).unwrap();
    let cn = DeRhamComplex::circle(9, f.neg()).unwrap();
    assert!(check_duality_identities(&c, &cn, 0, 1.0).is_err());
}

#[test]
fn evaluation_matches_basis_sum() {
    let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
    let mut v = vec![0.0; c.dims()[0]];
    // cos θ₁ · sin 2θ₂ normalized: index pos(1)*(2N+1) + pos(-2).
    v[pos_of(1) * len(6) + pos_of(-2)] = 1.0;
    let x = [0.4, 1.3];
    let got = c.evaluate(0, &v, &x)[0];
    let want = (0.4f64).cos() * (2.6f64).sin() / PI;
    assert!((got - want).abs() < 1e-14);
    assert_eq!(Manifold::FlatTorus.dim(), 2);
}

#[test]
fn single_precision_assembly() {
    let c = DeRhamComplex::<f32>::circle(8, TrigPoly::sin2()).unwrap();
    let l = c.witten_laplacian(0, 1.0).unwrap();
    let oracle = collocation_oracle(8, 1.0);
    let diff = l.map(|x| x as f64) - oracle;
    assert!(diff.amax() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplacian_is_symmetric_psd(t in -4.0f64..4.0, q in 0usize..3) {
        let c = DeRhamComplex::<f64>::torus(6, TrigPoly::sin2_product()).unwrap();
        let l = c.witten_laplacian(q, t).unwrap();
        prop_assert_eq!(amax(&(&l - l.transpose())), 0.0);
        let ev = sorted_eigs(&l);
        prop_assert!(ev[0] >= -1e-10 * (1.0 + ev[ev.len() - 1]));
    }

    #[test]
    fn star_identities_hold_at_random_parameters(t in -6.0f64..6.0, q in 0usize..3, a in -1.5f64..1.5) {
        let f = TrigPoly::from_terms(2, [(vec![-2, 0], 1.0), (vec![1, 0], a), (vec![0, 1], 0.5), (vec![1, -1], 0.3)]);
        let c = DeRhamComplex::torus(6, f.clone()).unwrap();
        let cn = DeRhamComplex::torus(6, f.neg()).unwrap();
        let r = check_duality_identities(&c, &cn, q, t).unwrap();
        let scale = 1.0 + amax(&c.witten_laplacian(q, t).unwrap());
        prop_assert!(r.max() <= 1e-13 * scale, "{:?}", r);
    }
}
