use std::f64::consts::PI;

use derham_core::{DeRhamComplex, TrigPoly};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_branches::*;

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    a.qr().q()
}

fn circle(n: usize) -> DeRhamComplex<f64> {
    DeRhamComplex::circle(n, TrigPoly::sin2()).unwrap()
}

fn torus(n: usize) -> DeRhamComplex<f64> {
    DeRhamComplex::torus(n, TrigPoly::sin2_product()).unwrap()
}

/// Every branch value at a sample equals a distinct eigenvalue of the dense solve.
fn assert_stitched(a: impl Fn(f64) -> DMatrix<f64>, branches: &[EigenBranch<f64>]) {
    for s in 0..branches[0].samples.len() {
        let t = branches[0].samples[s].t;
        let spec = eig_sym(&a(t), None).unwrap().values;
        let tol = 1e-9 * (1.0 + spec.last().unwrap().abs());
        let mut used = vec![false; spec.len()];
        let mut vals: Vec<f64> = branches.iter().map(|b| b.samples[s].lambda).collect();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for v in vals {
            let j = (0..spec.len())
                .filter(|&j| !used[j])
                .min_by(|&i, &j| (spec[i] - v).abs().partial_cmp(&(spec[j] - v).abs()).unwrap())
                .unwrap();
            assert!((spec[j] - v).abs() <= tol, "t = {t}: branch value {v} not in spectrum");
            used[j] = true;
        }
    }
}

#[test]
fn diagonal_eigenpairs() {
    let a = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
    let e = eig_sym(&a, None).unwrap();
    assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    for (i, &axis) in [1usize, 2, 0].iter().enumerate() {
        assert!((e.vectors[(axis, i)].abs() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn constructed_spectrum_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 30;
    let q = random_orthogonal(n, &mut rng);
    let lam: Vec<f64> = (0..n).map(|i| i as f64 * 0.37 - 3.0).collect();
    let a = &q * DMatrix::from_diagonal(&DVector::from_vec(lam.clone())) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let e = eig_sym(&a, None).unwrap();
    for (x, y) in e.values.iter().zip(&lam) {
        assert!((x - y).abs() < 1e-10);
    }
    let norm = a.norm();
    for i in 0..n {
        let v = e.vectors.column(i);
        assert!((&a * v - v * e.values[i]).norm() <= 1e-9 * norm);
    }
    assert!((e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n)).amax() < 1e-12);
}

#[test]
fn partial_and_rejections() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
    assert!(matches!(eig_sym(&a, None), Err(SpectralError::NonSymmetric(_))));
    let b = DMatrix::<f64>::zeros(2, 3);
    assert!(matches!(eig_sym(&b, None), Err(SpectralError::NotSquare(2, 3))));
    let c = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![5.0, 4.0, 3.0]));
    let v = eig_sym(&c, Some(2)).unwrap().values;
    assert!(v.len() == 2 && (v[0] - 3.0).abs() < 1e-14 && (v[1] - 4.0).abs() < 1e-14);
}

#[test]
fn circle_flat_spectrum() {
    let c = circle(8);
    let e = eig_sym(&c.witten_laplacian(0, 0.0).unwrap(), None).unwrap();
    let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0, 16.0, 16.0];
    for (x, y) in e.values.iter().zip(expected) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn identical_inputs_match_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = random_orthogonal(6, &mut rng);
    let p = EigenPairs { values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vectors: q };
    let m = match_step(&p, &p, &MatchOptions::default());
    assert_eq!(m.assignment, vec![0, 1, 2, 3, 4, 5]);
    assert!(m.overlaps.iter().all(|&o| (o - 1.0).abs() < 1e-12));
    assert!(m.signs.iter().all(|&s| s == 1.0));
}

#[test]
fn swapped_vectors_give_transposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q = random_orthogonal(4, &mut rng);
    let prev = EigenPairs { values: vec![1.0, 2.0, 3.0, 4.0], vectors: q.clone() };
    let mut swapped = q.clone();
    swapped.swap_columns(1, 2);
    swapped.column_mut(3).neg_mut();
    let next = EigenPairs { values: vec![1.0, 2.0, 3.0, 4.0], vectors: swapped };
    let m = match_step(&prev, &next, &MatchOptions::default());
    assert_eq!(m.assignment, vec![0, 2, 1, 3]);
    assert_eq!(m.signs[3], -1.0);
    assert!((m.vectors.column(3) - q.column(3)).norm() < 1e-12);
}

#[test]
fn degenerate_cluster_matches_by_subspace() {
    // A rotated basis of a doubly degenerate eigenspace is a perfect continuation.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q = random_orthogonal(5, &mut rng);
    let prev = EigenPairs { values: vec![0.0, 1.0, 1.0, 2.0, 3.0], vectors: q.clone() };
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let mut next = q.clone();
    next.set_column(1, &(q.column(1) * c + q.column(2) * s));
    next.set_column(2, &(q.column(2) * c - q.column(1) * s));
    let m = match_step(&prev, &EigenPairs { values: prev.values.clone(), vectors: next }, &MatchOptions::default());
    assert!(m.min_overlap() > 1.0 - 1e-12);
    assert!((m.vectors.column(1) - q.column(1)).norm() < 1e-12);
}

fn two_level(eps: f64) -> impl Fn(f64) -> DMatrix<f64> {
    move |t| DMatrix::from_row_slice(2, 2, &[t - 1.0, eps, eps, 1.0 - t])
}

#[test]
fn avoided_crossing_follows_analytic_branch() {
    let eps = 1e-3;
    let grid = uniform_grid(2.0, 0.25);
    let br = track_family(two_level(eps), |_| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), &grid, 2, &TrackOptions::default())
        .unwrap();
    // Closed form: λ± = ±√((t−1)² + ε²), lower eigenvector (−sin φ, cos φ)
    // with tan 2φ = ε/(t−1), rotating by a quarter turn across t = 1.
    let lower = br.iter().find(|b| b.first().lambda < 0.0).unwrap();
    assert!(lower.crossings.is_empty());
    assert!(lower.samples.len() > grid.len(), "bisection refines near the crossing");
    for s in &lower.samples {
        let r = ((s.t - 1.0).powi(2) + eps * eps).sqrt();
        assert!((s.lambda + r).abs() < 1e-12);
        let phi = 0.5 * eps.atan2(s.t - 1.0);
        let v = DVector::from_vec(vec![-phi.sin(), phi.cos()]);
        assert!((s.vector.dot(&v).abs() - 1.0).abs() < 1e-10);
        assert!(s.overlap >= 0.9);
    }
    assert!(lower.first().vector[0].abs() > 0.99 && lower.last().vector[1].abs() > 0.99);
}

#[test]
fn exact_crossing_keeps_diabatic_vectors() {
    let grid = uniform_grid(2.0, 0.25);
    let br = track_family(two_level(0.0), |_| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), &grid, 2, &TrackOptions::default())
        .unwrap();
    for b in &br {
        let slope = (b.last().lambda - b.first().lambda) / 2.0;
        assert!((slope.abs() - 1.0).abs() < 1e-12, "branches pass straight through");
        assert!(b.min_overlap() > 1.0 - 1e-12);
    }
}

#[test]
fn undeformed_branches_are_constant() {
    let c = DeRhamComplex::<f64>::circle(8, TrigPoly::zero(1)).unwrap();
    let grid = uniform_grid(3.0, 0.5);
    let br = track_branches(&c, 0, &grid, 7, &TrackOptions::default()).unwrap();
    for b in &br {
        assert_eq!(b.samples.len(), grid.len());
        for s in &b.samples {
            assert!((s.lambda - b.first().lambda).abs() < 1e-12);
            assert!(s.overlap > 1.0 - 1e-12);
        }
    }
    let pkg = classify(br, 1, 0, 3.0, &ClassifyOptions::default());
    assert!(matches!(pkg, Err(SpectralError::NoMorseData { c: 0, beta: 1, .. })));
}

#[test]
fn grid_validation() {
    let c = circle(8);
    let opts = TrackOptions::default();
    assert_eq!(track_branches(&c, 0, &[0.5, 1.0], 2, &opts).unwrap_err(), SpectralError::InvalidGrid);
    assert_eq!(track_branches(&c, 0, &[0.0, 1.0, 1.0], 2, &opts).unwrap_err(), SpectralError::InvalidGrid);
    assert!(matches!(track_branches(&c, 0, &[0.0, 1.0], 100, &opts), Err(SpectralError::TooManyBranches { .. })));
    assert!(track_branches(&c, 2, &[0.0, 1.0], 2, &opts).is_err());
}

#[test]
fn circle_package_and_localization() {
    let c = circle(48);
    let grid = uniform_grid(15.0, 0.25);
    let br = track_branches(&c, 0, &grid, 8, &TrackOptions::default()).unwrap();
    assert_stitched(|t| c.witten_laplacian(0, t).unwrap(), &br);
    for b in &br {
        assert!(b.min_overlap() >= 0.9);
        for s in &b.samples {
            assert!((s.vector.norm() - 1.0).abs() < 1e-10);
            assert!(s.lambda >= -1e-9 * (1.0 + s.lambda_max));
        }
    }

    let copts = ClassifyOptions::default();
    let mut pkg = classify(br, 1, 2, 15.0, &copts).unwrap();
    assert_eq!(pkg.with_label(Label::Zero).count(), 1);
    assert_eq!(pkg.with_label(Label::VsPositive).count(), 1);
    assert!(pkg.gap >= 10.0);
    assert!(pkg.non_growing.is_empty());
    let start = pkg.values_at_start();
    assert!(start[0].abs() < 1e-12 && (start[1] - 1.0).abs() < 1e-9);

    let sites = vec![
        Site { id: 0, coords: vec![3.0 * PI / 4.0], index: 0 },
        Site { id: 1, coords: vec![7.0 * PI / 4.0], index: 0 },
        Site { id: 2, coords: vec![PI / 4.0], index: 1 },
        Site { id: 3, coords: vec![5.0 * PI / 4.0], index: 1 },
    ];
    assign_to_critical_points(&c, &mut pkg, &sites, &copts, &LocalizeOptions::default()).unwrap();
    assert!(!pkg.ambiguous);
    let mut cps: Vec<usize> = pkg.package().iter().map(|b| b.critical_point.unwrap()).collect();
    cps.sort();
    assert_eq!(cps, vec![0, 1]);
    let (m0, m1) = (pkg.masses[0].2, pkg.masses[1].2);
    assert!(m0 > 0.99 && (m0 - m1).abs() < 1e-8, "masses {m0} {m1}");
}

#[test]
fn circle_one_forms_mirror_functions() {
    let c = circle(48);
    let grid = uniform_grid(15.0, 0.25);
    let br = track_branches(&c, 1, &grid, 8, &TrackOptions::default()).unwrap();
    let pkg = classify(br, 1, 2, 15.0, &ClassifyOptions::default()).unwrap();
    let start = pkg.values_at_start();
    assert!(start[0].abs() < 1e-12 && (start[1] - 1.0).abs() < 1e-9);
}

#[test]
fn torus_branches_are_circle_sums() {
    let t_max = 1.5;
    let grid = uniform_grid(t_max, 0.25);
    let circ = track_branches(&circle(12), 0, &grid, 12, &TrackOptions::default()).unwrap();
    let tor = torus(12);
    let br = track_branches(&tor, 0, &grid, 10, &TrackOptions::default()).unwrap();
    assert_stitched(|t| tor.witten_laplacian(0, t).unwrap(), &br);
    for &t in &grid {
        let mu: Vec<f64> = circ.iter().map(|b| b.sample_at(t).unwrap().lambda).collect();
        for b in &br {
            let v = b.sample_at(t).unwrap().lambda;
            let best = mu
                .iter()
                .flat_map(|a| mu.iter().map(move |b| (a + b - v).abs()))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "t = {t}: {v} is not a sum of circle values");
        }
    }

    let copts = ClassifyOptions::default();
    let pkg = classify(br, 1, 4, t_max, &copts).unwrap();
    let mu2 = circ.iter().map(|b| b.first().lambda).filter(|&x| x > 0.5).fold(f64::INFINITY, f64::min);
    let expected = [0.0, mu2, mu2, 2.0 * mu2];
    for (x, y) in pkg.values_at_start().iter().zip(expected) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn torus_index_one_assignment_is_bijective() {
    let tor = torus(12);
    let t_max = 1.5;
    let grid = uniform_grid(t_max, 0.25);
    let br = track_branches(&tor, 1, &grid, 14, &TrackOptions::default()).unwrap();
    let copts = ClassifyOptions::default();
    let mut pkg = classify(br, 2, 8, t_max, &copts).unwrap();
    let (mins, maxs) = ([3.0 * PI / 4.0, 7.0 * PI / 4.0], [PI / 4.0, 5.0 * PI / 4.0]);
    let mut sites = Vec::new();
    for &a in &mins {
        for &b in &maxs {
            sites.push(Site { id: sites.len(), coords: vec![a, b], index: 1 });
            sites.push(Site { id: sites.len(), coords: vec![b, a], index: 1 });
        }
    }
    assign_to_critical_points(&tor, &mut pkg, &sites, &copts, &LocalizeOptions::default()).unwrap();
    let mut cps: Vec<usize> = pkg.package().iter().map(|b| b.critical_point.unwrap()).collect();
    cps.sort();
    assert_eq!(cps, (0..8).collect::<Vec<_>>());
    let wrong = vec![Site { id: 0, coords: vec![0.0, 0.0], index: 1 }];
    assert!(matches!(
        assign_to_critical_points(&tor, &mut pkg, &wrong, &copts, &LocalizeOptions::default()),
        Err(SpectralError::SiteCountMismatch { .. })
    ));
}

#[test]
fn ball_rule_measures_area() {
    let r = PI / 8.0;
    let len: f64 = ball_rule(&[1.0], r, 16).iter().map(|p| p.1).sum();
    assert!((len - 2.0 * r).abs() < 1e-14);
    let area: f64 = ball_rule(&[1.0, 2.0], r, 16).iter().map(|p| p.1).sum();
    assert!((area - PI * r * r).abs() < 1e-13);
}

#[test]
fn classification_errors() {
    let mk = |vals: &[(f64, f64, f64)]| -> Vec<EigenBranch<f64>> {
        vals.iter()
            .enumerate()
            .map(|(id, &(a, b, c))| EigenBranch {
                q: 0,
                id,
                samples: [(0.0, a), (5.0, b), (10.0, c)]
                    .iter()
                    .map(|&(t, lambda)| Sample { t, lambda, vector: DVector::from_element(1, 1.0), overlap: 1.0, lambda_max: 10.0 })
                    .collect(),
                label: None,
                critical_point: None,
                crossings: Vec::new(),
            })
            .collect()
    };
    let opts = ClassifyOptions::default();
    let ok = classify(mk(&[(0.0, 0.0, 0.0), (1.0, 1e-3, 1e-6), (2.0, 5.0, 9.0)]), 1, 2, 10.0, &opts).unwrap();
    assert_eq!(ok.with_label(Label::Large).count(), 1);
    let no_decay = classify(mk(&[(0.0, 0.0, 0.0), (1.0, 1e-3, 1e-3), (2.0, 5.0, 9.0)]), 1, 2, 10.0, &opts);
    assert!(matches!(no_decay, Err(SpectralError::GapNotFound { .. })));
    let no_gap = classify(mk(&[(0.0, 0.0, 0.0), (1.0, 0.5, 0.2), (2.0, 1.0, 0.9)]), 1, 2, 10.0, &opts);
    assert!(matches!(no_gap, Err(SpectralError::GapNotFound { .. })));
    let zeros = classify(mk(&[(0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (2.0, 5.0, 9.0)]), 1, 2, 10.0, &opts);
    assert!(matches!(zeros, Err(SpectralError::ZeroCountMismatch { found: 2, .. })));
    let flagged = classify(mk(&[(0.0, 0.0, 0.0), (1.0, 1e-3, 1e-6), (2.0, 9.0, 5.0)]), 1, 2, 10.0, &opts).unwrap();
    assert_eq!(flagged.non_growing, vec![2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn permuted_orthonormal_sets_are_matched(seed in 0u64..10_000, n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(n, &mut rng);
        let values: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let next = DMatrix::from_fn(n, n, |r, c| q[(r, perm[c])] * if c % 2 == 0 { 1.0 } else { -1.0 });
        let m = match_step(
            &EigenPairs { values: values.clone(), vectors: q.clone() },
            &EigenPairs { values, vectors: next },
            &MatchOptions::default(),
        );
        for i in 0..n {
            prop_assert_eq!(perm[m.assignment[i]], i);
            prop_assert!((m.vectors.column(i) - q.column(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn tracked_random_families_stay_continuous(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let sym = |rng: &mut ChaCha8Rng| {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            &a + a.transpose()
        };
        let (a0, a1) = (sym(&mut rng), sym(&mut rng));
        let fam = |t: f64| &a0 + &a1 * t;
        let br = track_family(fam, |_| a1.clone(), &uniform_grid(2.0, 0.25), 4, &TrackOptions::default()).unwrap();
        assert_stitched(fam, &br);
        for b in &br {
            prop_assert!(b.min_overlap() >= 0.9);
            for w in b.samples.windows(2) {
                let o = w[0].vector.dot(&w[1].vector);
                prop_assert!(o >= 0.9);
            }
            for s in &b.samples {
                prop_assert!((s.vector.norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
