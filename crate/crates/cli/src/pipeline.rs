//! End-to-end computations behind the subcommands.

use derham_core::{check_duality_identities, DeRhamComplex, DualityReport, Manifold, TrigPoly};
use morse_flow::{
    a_report, certify_flow, counts, int_matrix, morse_coboundary, package_basis, sites, AReport, CriticalOptions,
    CriticalPoint, MorseComplexData, MorseSmaleCertificate, ProductFlow, Quadrature,
};
use nalgebra::DMatrix;
use serde::Serialize;
use spectral_branches::{
    assign_to_critical_points, classify, eig_sym, track_branches, uniform_grid, ClassSummary, ClassifyOptions,
    DegreePackage, EigenBranch, Label, LocalizeOptions, MatchOptions, TrackOptions,
};
use torsion_lab::{
    cohomology_log_covolumes, composite_check, evaluate_theorem, harmonic_volumes, log_torsion, CompositeCheck,
    FiniteComplex, TorsionReport,
};

use crate::config::{ExperimentConfig, ManifoldTag};
use crate::error::CliError;

/// A validated configuration together with its assembled complex.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub f: TrigPoly<f64>,
    pub complex: DeRhamComplex<f64>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        config.validate()?;
        let f = config.function_poly()?;
        let complex = DeRhamComplex::build(config.manifold.into(), config.cutoff, f.clone())?;
        Ok(Self { config, f, complex })
    }

    pub fn manifold(&self) -> Manifold {
        self.config.manifold.into()
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.config.grid.t_max, self.config.grid.step)
    }

    pub fn track_options(&self) -> TrackOptions<f64> {
        let t = &self.config.tolerances;
        TrackOptions {
            matching: MatchOptions { cluster_tol: t.cluster_tol, overlap_min: t.overlap_min },
            h_min: t.h_min,
            coupling_tol: t.coupling_tol,
            window: None,
        }
    }

    pub fn classify_options(&self) -> ClassifyOptions<f64> {
        let t = &self.config.tolerances;
        ClassifyOptions { zero_tol: t.zero_tol, decay_ratio: t.decay_ratio, gap_min: t.gap_min }
    }

    pub fn localize_options(&self) -> LocalizeOptions {
        let t = &self.config.tolerances;
        LocalizeOptions { radius: t.ball_radius, mass_min: t.mass_min, ..LocalizeOptions::default() }
    }

    pub fn quadrature(&self) -> Quadrature<f64> {
        let d = Quadrature::<f64>::default();
        Quadrature::new(32, self.config.tolerances.quadrature_rel_tol, d.max_panels)
    }

    /// The `count` smallest eigenvalues of `Δ^q(t)`.
    pub fn spectrum(&self, q: usize, t: f64, count: usize) -> Result<Vec<f64>, CliError> {
        let l = self.complex.witten_laplacian(q, t)?;
        let k = count.min(l.nrows());
        Ok(eig_sym(&l, Some(k))?.values)
    }

    pub fn flow(&self) -> Result<ProductFlow, CliError> {
        Ok(ProductFlow::new(&self.f, self.manifold(), &CriticalOptions::default())?)
    }

    pub fn branches(&self, q: usize, k: usize) -> Result<Vec<EigenBranch<f64>>, CliError> {
        Ok(track_branches(&self.complex, q, &self.grid(), k, &self.track_options())?)
    }

    /// Tracked, classified and localized packages for every degree.
    pub fn packages(&self, flow: &ProductFlow) -> Result<Vec<DegreePackage<f64>>, CliError> {
        let n = self.complex.n();
        let cq = counts(&flow.points, n);
        let beta = self.complex.betti();
        let copts = self.classify_options();
        let site_list = sites(&flow.points);
        (0..=n)
            .map(|q| {
                let br = self.branches(q, cq[q] + self.config.extra_branches)?;
                let mut pkg = classify(br, beta[q], cq[q], self.config.grid.t_max, &copts)?;
                assign_to_critical_points(&self.complex, &mut pkg, &site_list, &copts, &self.localize_options())?;
                Ok(pkg)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub q: usize,
    pub t: f64,
    pub index: usize,
    pub lambda: f64,
}

pub fn spectrum_table(exp: &Experiment) -> Result<Vec<SpectrumRow>, CliError> {
    let s = &exp.config.spectrum;
    let mut rows = Vec::new();
    for &q in &s.degrees {
        for &t in &s.times {
            for (index, lambda) in exp.spectrum(q, t, s.count)?.into_iter().enumerate() {
                rows.push(SpectrumRow { q, t, index, lambda });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub id: usize,
    pub label: Option<Label>,
    pub critical_point: Option<usize>,
    pub lambda_0: f64,
    pub lambda_half: f64,
    pub lambda_t_max: f64,
    pub crossings: usize,
    pub min_overlap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub summary: ClassSummary,
    /// Package values at `t = 0`, zero branches first.
    pub package_at_zero: Vec<f64>,
    pub non_growing: Vec<usize>,
    pub ambiguous: bool,
    pub masses: Vec<(usize, usize, f64)>,
    pub branches: Vec<BranchReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PackageReport {
    pub t_max: f64,
    pub grid_points: usize,
    pub degrees: Vec<DegreeReport>,
}

pub fn package_report(pkgs: &[DegreePackage<f64>], t_max: f64) -> PackageReport {
    let degrees = pkgs
        .iter()
        .map(|p| DegreeReport {
            summary: ClassSummary::from(p),
            package_at_zero: p.values_at_start(),
            non_growing: p.non_growing.clone(),
            ambiguous: p.ambiguous,
            masses: p.masses.clone(),
            branches: p
                .branches
                .iter()
                .map(|b| BranchReport {
                    id: b.id,
                    label: b.label,
                    critical_point: b.critical_point,
                    lambda_0: b.first().lambda,
                    lambda_half: b.value_at(t_max / 2.0),
                    lambda_t_max: b.last().lambda,
                    crossings: b.crossings.len(),
                    min_overlap: b.min_overlap(),
                })
                .collect(),
        })
        .collect();
    let grid_points = pkgs.first().map_or(0, |p| p.branches.first().map_or(0, |b| b.samples.len()));
    PackageReport { t_max, grid_points, degrees }
}

/// Which reading of the torus example the numerics support: the `q = 0`
/// package at `t = 0` against `{0, μ, μ, 2μ}` for `μ = μ₁(0)` and `μ = μ₂(0)`.
#[derive(Debug, Clone, Serialize)]
pub struct MuReading {
    pub mu1_0: f64,
    pub mu2_0: f64,
    pub package_0: Vec<f64>,
    pub smallest_0: Vec<f64>,
    pub residual_mu1: f64,
    pub residual_mu2: f64,
    pub supported: String,
}

/// Circle branch values `μ_i(0)` of the first factor of a separable torus
/// function, tracked on the same grid and cutoff, ordered by value at `T_max`.
pub fn circle_factor_mu(exp: &Experiment, k: usize) -> Result<Vec<EigenBranch<f64>>, CliError> {
    let parts = exp.f.split_separable().ok_or_else(|| CliError::NotMorse("f is not separable".into()))?;
    let circle = DeRhamComplex::circle(exp.config.cutoff, parts[0].clone())?;
    let mut br = track_branches(&circle, 0, &exp.grid(), k, &exp.track_options())?;
    br.sort_by(|a, b| a.last().lambda.total_cmp(&b.last().lambda));
    Ok(br)
}

pub fn mu_reading(exp: &Experiment, torus_q0: &DegreePackage<f64>) -> Result<MuReading, CliError> {
    let mu = circle_factor_mu(exp, 4)?;
    let (mu1_0, mu2_0) = (mu[0].first().lambda, mu[1].first().lambda);
    let mut package_0 = torus_q0.values_at_start();
    package_0.sort_by(f64::total_cmp);
    let dist = |m: f64| {
        let target = [0.0, m, m, 2.0 * m];
        package_0.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let smallest_0 = exp.spectrum(0, 0.0, package_0.len())?;
    let (residual_mu1, residual_mu2) = (dist(mu1_0), dist(mu2_0));
    let supported = if residual_mu2 <= residual_mu1 { "mu2" } else { "mu1" }.to_string();
    Ok(MuReading { mu1_0, mu2_0, package_0, smallest_0, residual_mu1, residual_mu2, supported })
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseReport {
    pub critical_points: Vec<CriticalPoint>,
    pub counts: Vec<usize>,
    pub certificate: MorseSmaleCertificate,
    pub coboundary: Vec<Vec<Vec<i64>>>,
    pub betti: Vec<usize>,
}

pub fn morse_report(flow: &ProductFlow) -> Result<(MorseReport, MorseComplexData), CliError> {
    let data = morse_coboundary(flow)?;
    let n = flow.manifold.dim();
    let report = MorseReport {
        critical_points: flow.points.clone(),
        counts: counts(&flow.points, n),
        certificate: certify_flow(flow),
        coboundary: (0..n).map(|q| data.rows(q)).collect(),
        betti: data.betti.clone(),
    };
    Ok((report, data))
}

pub fn a_reports(exp: &Experiment, flow: &ProductFlow, pkgs: &[DegreePackage<f64>]) -> Result<Vec<AReport>, CliError> {
    let quad = exp.quadrature();
    exp.config.a_times().iter().map(|&t| Ok(a_report(&exp.complex, flow, pkgs, t, &quad)?)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseTorsion {
    /// `log T(C*, ∂*)` with the standard inner product.
    pub log_t: f64,
    /// `log covol(H^q_ℤ)` per degree.
    pub log_covolumes: Vec<f64>,
    /// `log T(C*) − Σ (−1)^q log covol(H^q_ℤ)`.
    pub log_tor: f64,
}

pub fn morse_torsion(data: &MorseComplexData) -> Result<MorseTorsion, CliError> {
    let c = FiniteComplex::<f64>::orthonormal(data.real_coboundary())?;
    let log_t = log_torsion(&c)?;
    let log_covolumes = cohomology_log_covolumes(&data.coboundary, &data.dims())
        .ok_or_else(|| CliError::Numerical("integral Morse cohomology has torsion".into()))?;
    let corr: f64 = log_covolumes.iter().enumerate().map(|(q, v)| if q % 2 == 0 { *v } else { -v }).sum();
    Ok(MorseTorsion { log_t, log_covolumes, log_tor: log_t - corr })
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionOutput {
    pub report: TorsionReport,
    pub vs_lambda0: Vec<Vec<f64>>,
    pub a0: AReport,
    pub morse: MorseTorsion,
    pub composite: Vec<CompositeCheck>,
    pub mu_reading: Option<MuReading>,
    pub duality: Option<DualityOutput>,
}

/// Chain-map tolerance for `Int : Ω_vs(t) → C*`: the small eigenspaces are
/// only invariant under the truncated differential up to Galerkin error
/// (about 1e−6 on the torus at `N = 12`). The residual is reported.
pub const COMPOSITE_CHAIN_TOL: f64 = 1e-4;

pub fn composite_at(
    exp: &Experiment,
    flow: &ProductFlow,
    pkgs: &[DegreePackage<f64>],
    data: &MorseComplexData,
    t: f64,
    log_a: f64,
) -> Result<CompositeCheck, CliError> {
    let c = &exp.complex;
    let quad = exp.quadrature();
    let n = c.n();
    let w: Vec<DMatrix<f64>> = pkgs.iter().map(|p| package_basis(p, t)).collect::<Result<_, _>>()?;
    let d: Vec<DMatrix<f64>> = (0..n).map(|q| c.witten_d(q, t)).collect::<Result<_, _>>()?;
    let int: Vec<DMatrix<f64>> =
        (0..=n).map(|q| int_matrix(c, flow, q, t, c.cutoff(), &quad)).collect::<Result<_, _>>()?;
    Ok(composite_check(t, &d, &w, &int, &data.real_coboundary(), log_a, COMPOSITE_CHAIN_TOL)?)
}

pub fn torsion(exp: &Experiment, with_duality: bool) -> Result<TorsionOutput, CliError> {
    let flow = exp.flow()?;
    let pkgs = exp.packages(&flow)?;
    torsion_with(exp, &flow, &pkgs, with_duality)
}

/// [`torsion`] on already computed packages.
pub fn torsion_with(
    exp: &Experiment,
    flow: &ProductFlow,
    pkgs: &[DegreePackage<f64>],
    with_duality: bool,
) -> Result<TorsionOutput, CliError> {
    let (_, data) = morse_report(flow)?;
    let quad = exp.quadrature();
    let a0 = a_report(&exp.complex, flow, pkgs, 0.0, &quad)?;
    if !a0.positive() {
        return Err(CliError::Numerical(format!("a(0) = {:e} is flagged singular; the estimate is unavailable", a0.a)));
    }
    let vs_lambda0: Vec<Vec<f64>> =
        pkgs.iter().map(|p| p.with_label(Label::VsPositive).map(|b| b.first().lambda).collect()).collect();
    let volumes = harmonic_volumes(exp.manifold(), 1.0);
    let mut report = evaluate_theorem(&vs_lambda0, a0.a, volumes, 0.0)?;
    let grid = exp.grid();
    let mut composite = Vec::new();
    for t in [0.0, 1.0, 5.0] {
        if grid.contains(&t) {
            let log_a = if t == 0.0 { a0.log_a } else { a_report(&exp.complex, flow, pkgs, t, &quad)?.log_a };
            composite.push(composite_at(exp, flow, pkgs, &data, t, log_a)?);
        }
    }
    report.composite = composite.first().cloned();
    let mu_reading = match exp.config.manifold {
        ManifoldTag::Torus => Some(mu_reading(exp, &pkgs[0])?),
        ManifoldTag::Circle => None,
    };
    let duality = if with_duality { Some(duality(exp)?) } else { None };
    Ok(TorsionOutput { report, vs_lambda0, a0, morse: morse_torsion(&data)?, composite, mu_reading, duality })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityRow {
    pub q: usize,
    pub t: f64,
    pub residuals: DualityReport<f64>,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PackageDuality {
    pub q: usize,
    /// Largest `|λ^{n−q}_{−f}(t) − λ^q_f(t)|` over grid points and branches.
    pub value_residual: f64,
    /// Largest distance between `⋆ v` and the matching `−f` eigenspace.
    pub star_residual: f64,
    pub compared: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityOutput {
    pub identities: Vec<DualityRow>,
    pub packages: Vec<PackageDuality>,
}

pub fn duality_identities(exp: &Experiment) -> Result<Vec<DualityRow>, CliError> {
    let c = &exp.complex;
    let c_neg = DeRhamComplex::build(exp.manifold(), c.cutoff(), exp.f.neg())?;
    let mut rows = Vec::new();
    for q in 0..=c.n() {
        for t in [0.0, 1.0, 5.0] {
            let r = check_duality_identities(c, &c_neg, q, t)?;
            rows.push(DualityRow { q, t, max: r.max(), residuals: r });
        }
    }
    Ok(rows)
}

/// Compares tracked branches of `f` in degree `q` with those of `−f` in
/// degree `n − q` at every uniform grid point. The cluster containing the
/// largest tracked value is left out, since the window may cut it.
pub fn package_duality(exp: &Experiment, q: usize, k: usize) -> Result<PackageDuality, CliError> {
    let c = &exp.complex;
    let n = c.n();
    let c_neg = DeRhamComplex::build(exp.manifold(), c.cutoff(), exp.f.neg())?;
    let grid = exp.grid();
    let opts = exp.track_options();
    let a = track_branches(c, q, &grid, k, &opts)?;
    let b = track_branches(&c_neg, n - q, &grid, k, &opts)?;
    let star = c.hodge_star(q)?;
    let mut value_residual: f64 = 0.0;
    let mut star_residual: f64 = 0.0;
    let mut compared = 0;
    for &t in &grid {
        let (Some(sa), Some(sb)) = (samples_at(&a, t), samples_at(&b, t)) else { continue };
        let top = sa.last().map_or(0.0, |s| s.0);
        let tol = 1e-9 * (1.0 + top.abs());
        let keep = sa.iter().take_while(|s| s.0 < top - tol).count();
        for i in 0..keep {
            value_residual = value_residual.max((sa[i].0 - sb[i].0).abs());
        }
        // Group the kept values into clusters and compare ⋆-images of the spans.
        let mut start = 0;
        while start < keep {
            let mut end = start + 1;
            while end < keep && sa[end].0 - sa[end - 1].0 <= 1e-6 * (1.0 + sa[end].0.abs()) {
                end += 1;
            }
            let va = DMatrix::from_columns(&sa[start..end].iter().map(|s| star * &s.1).collect::<Vec<_>>());
            let vb = DMatrix::from_columns(&sb[start..end].iter().map(|s| s.1.clone()).collect::<Vec<_>>());
            let proj = &vb * (vb.transpose() * &va);
            star_residual = star_residual.max((proj - &va).amax());
            start = end;
        }
        compared += 1;
    }
    Ok(PackageDuality { q, value_residual, star_residual, compared })
}

type ValueVec = (f64, nalgebra::DVector<f64>);

fn samples_at(br: &[EigenBranch<f64>], t: f64) -> Option<Vec<ValueVec>> {
    let mut v: Vec<ValueVec> =
        br.iter().map(|b| b.sample_at(t).map(|s| (s.lambda, s.vector.clone()))).collect::<Option<_>>()?;
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    Some(v)
}

pub fn duality(exp: &Experiment) -> Result<DualityOutput, CliError> {
    let identities = duality_identities(exp)?;
    let n = exp.complex.n();
    let flow = exp.flow().ok();
    let packages = (0..=n)
        .map(|q| {
            let c = flow.as_ref().map_or(2, |fl| counts(&fl.points, n)[q]);
            package_duality(exp, q, c + exp.config.extra_branches)
        })
        .collect::<Result<_, _>>()?;
    Ok(DualityOutput { identities, packages })
}
