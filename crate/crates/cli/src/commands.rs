//! Subcommand runners: each turns an [`Experiment`] into output artifacts.

use spectral_branches::{DegreePackage, EigenBranch, Label};
use torsion_lab::{anomaly_case, check_anomaly, AnomalyCheck};

use crate::error::CliError;
use crate::output::{csv_document, json_document, num, Artifact, Format, Meta};
use crate::pipeline::{self, Experiment};
use crate::svg::{plot, Scale, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Branches,
    Package,
    Morse,
    Torsion { duality: bool },
    Duality,
    VerifyAnomaly,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Branches => "branches",
            Self::Package => "package",
            Self::Morse => "morse",
            Self::Torsion { .. } => "torsion",
            Self::Duality => "duality",
            Self::VerifyAnomaly => "verify-anomaly",
        }
    }
}

/// Artifacts of a run plus a one-line summary. `failure` is set when the
/// run completed but a checked property did not hold.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>, summary: String) -> Self {
        Self { artifacts, summary, failure: None }
    }
}

pub fn run(cmd: Command, exp: &Experiment, format: Format) -> Result<Outcome, CliError> {
    let meta = Meta::new(cmd.name(), &exp.config.digest());
    match cmd {
        Command::Spectrum => spectrum(exp, &meta, format),
        Command::Branches => branches(exp, &meta, format),
        Command::Package => package(exp, &meta, format),
        Command::Morse => morse(exp, &meta),
        Command::Torsion { duality } => torsion(exp, &meta, format, duality),
        Command::Duality => duality(exp, &meta, format),
        Command::VerifyAnomaly => verify_anomaly(exp, &meta, format),
    }
}

fn spectrum(exp: &Experiment, meta: &Meta, format: Format) -> Result<Outcome, CliError> {
    let rows = pipeline::spectrum_table(exp)?;
    let art = match format {
        Format::Json => Artifact::new("spectrum.json", json_document(meta, "spectrum", &rows)),
        Format::Csv => {
            let r: Vec<Vec<String>> =
                rows.iter().map(|r| vec![r.q.to_string(), num(r.t), r.index.to_string(), num(r.lambda)]).collect();
            Artifact::new("spectrum.csv", csv_document(meta, &["q", "t", "index", "lambda"], &r))
        }
    };
    let summary = format!("{} eigenvalues over {} (q, t) pairs", rows.len(), exp.config.spectrum.degrees.len() * exp.config.spectrum.times.len());
    Ok(Outcome::ok(vec![art], summary))
}

fn label_name(l: Option<Label>) -> &'static str {
    match l {
        Some(Label::Zero) => "ZERO",
        Some(Label::VsPositive) => "VS_POSITIVE",
        Some(Label::Large) => "LARGE",
        None => "",
    }
}

fn branch_plots(meta: &Meta, q: usize, branches: &[EigenBranch<f64>]) -> Vec<Artifact> {
    let series: Vec<Series> = branches
        .iter()
        .map(|b| Series {
            label: match (b.label, b.critical_point) {
                (Some(l), Some(x)) => format!("branch {} {} at critical point {x}", b.id, label_name(Some(l))),
                (l, _) => format!("branch {} {}", b.id, label_name(l)),
            },
            points: b.samples.iter().map(|s| (s.t, s.lambda)).collect(),
            dashed: b.label == Some(Label::Large),
        })
        .collect();
    [(Scale::Linear, "linear"), (Scale::Log, "log")]
        .into_iter()
        .map(|(scale, tag)| {
            let title = format!("Witten Laplacian branches, degree {q} ({tag} scale)");
            Artifact::new(format!("branches_q{q}_{tag}.svg"), plot(meta, &title, &series, scale))
        })
        .collect()
}

fn branch_rows(branches: &[EigenBranch<f64>]) -> Vec<Vec<String>> {
    branches
        .iter()
        .flat_map(|b| {
            b.samples.iter().map(move |s| {
                vec![b.q.to_string(), b.id.to_string(), num(s.t), num(s.lambda), label_name(b.label).to_string()]
            })
        })
        .collect()
}

fn branches(exp: &Experiment, meta: &Meta, format: Format) -> Result<Outcome, CliError> {
    let n = exp.complex.n();
    let c = exp.flow().ok().map(|fl| morse_flow::counts(&fl.points, n));
    let mut all = Vec::new();
    let mut artifacts = Vec::new();
    for q in 0..=n {
        let k = c.as_ref().map_or(2, |c| c[q]) + exp.config.extra_branches;
        let br = exp.branches(q, k)?;
        artifacts.extend(branch_plots(meta, q, &br));
        all.extend(br);
    }
    let header = ["q", "branch", "t", "lambda", "label"];
    let table = match format {
        Format::Csv => Artifact::new("branches.csv", csv_document(meta, &header, &branch_rows(&all))),
        Format::Json => {
            let rows: Vec<serde_json::Value> = all
                .iter()
                .map(|b| {
                    serde_json::json!({
                        "q": b.q, "id": b.id,
                        "t": b.ts(), "lambda": b.lambdas(),
                        "crossings": b.crossings,
                    })
                })
                .collect();
            Artifact::new("branches.json", json_document(meta, "branches", &rows))
        }
    };
    artifacts.insert(0, table);
    Ok(Outcome::ok(artifacts, format!("{} branches tracked to t = {}", all.len(), exp.config.grid.t_max)))
}

fn package_artifacts(
    exp: &Experiment,
    meta: &Meta,
    format: Format,
    pkgs: &[DegreePackage<f64>],
) -> Result<Vec<Artifact>, CliError> {
    let report = pipeline::package_report(pkgs, exp.config.grid.t_max);
    let mut artifacts = vec![Artifact::new("package.json", json_document(meta, "package-report", &report))];
    if format == Format::Csv {
        let rows: Vec<Vec<String>> = report
            .degrees
            .iter()
            .map(|d| {
                let s = &d.summary;
                [s.q, s.beta, s.c, s.zero, s.vs_positive, s.large].iter().map(|v| v.to_string()).chain([num(s.gap)]).collect()
            })
            .collect();
        artifacts.push(Artifact::new(
            "classification.csv",
            csv_document(meta, &["q", "beta", "c", "zero", "vs_positive", "large", "gap"], &rows),
        ));
    }
    for p in pkgs {
        artifacts.extend(branch_plots(meta, p.q, &p.branches));
    }
    Ok(artifacts)
}

fn package(exp: &Experiment, meta: &Meta, format: Format) -> Result<Outcome, CliError> {
    let flow = exp.flow()?;
    let pkgs = exp.packages(&flow)?;
    let summary = pkgs
        .iter()
        .map(|p| {
            let mut v = p.values_at_start();
            v.iter_mut().for_each(|x| *x = (*x * 1e9).round() / 1e9);
            format!("q={}: {:?}", p.q, v)
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome::ok(package_artifacts(exp, meta, format, &pkgs)?, format!("package at t = 0: {summary}")))
}

fn morse(exp: &Experiment, meta: &Meta) -> Result<Outcome, CliError> {
    let flow = exp.flow()?;
    let (report, data) = pipeline::morse_report(&flow)?;
    let pkgs = exp.packages(&flow)?;
    let a = pipeline::a_reports(exp, &flow, &pkgs)?;
    let tor = pipeline::morse_torsion(&data)?;
    let positive = a.iter().all(|r| r.positive());
    let doc = serde_json::json!({ "flow": report, "a": a, "torsion": tor });
    let summary = format!(
        "{} critical points, Morse-Smale {}, a(t) positive at {} sampled t: {}",
        report.critical_points.len(),
        if report.certificate.holds { "certified" } else { "violated" },
        a.len(),
        positive
    );
    let failure = (!positive).then(|| CliError::Numerical("a(t) vanishes or is flagged singular at a sampled t".into()));
    Ok(Outcome { artifacts: vec![Artifact::new("morse.json", json_document(meta, "morse-report", &doc))], summary, failure })
}

fn duality_artifact(meta: &Meta, format: Format, d: &pipeline::DualityOutput) -> Artifact {
    match format {
        Format::Json => Artifact::new("duality.json", json_document(meta, "duality", d)),
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = d
                .identities
                .iter()
                .map(|r| {
                    let x = &r.residuals;
                    vec![
                        "identities".into(),
                        r.q.to_string(),
                        num(r.t),
                        num(x.star_square),
                        num(x.flat_conjugation),
                        num(x.witten_conjugation),
                        num(x.reflection),
                        String::new(),
                        String::new(),
                    ]
                })
                .collect();
            rows.extend(d.packages.iter().map(|p| {
                let mut r = vec!["package".into(), p.q.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 5));
                r.extend([num(p.value_residual), num(p.star_residual)]);
                r
            }));
            let header = [
                "kind",
                "q",
                "t",
                "star_square",
                "flat_conjugation",
                "witten_conjugation",
                "reflection",
                "package_values",
                "package_star",
            ];
            Artifact::new("duality.csv", csv_document(meta, &header, &rows))
        }
    }
}

fn duality_summary(d: &pipeline::DualityOutput) -> String {
    let id = d.identities.iter().map(|r| r.max).fold(0.0, f64::max);
    let pv = d.packages.iter().map(|p| p.value_residual).fold(0.0, f64::max);
    let ps = d.packages.iter().map(|p| p.star_residual).fold(0.0, f64::max);
    format!("duality residuals: identities {id:.3e}, package values {pv:.3e}, star images {ps:.3e}")
}

fn duality(exp: &Experiment, meta: &Meta, format: Format) -> Result<Outcome, CliError> {
    let d = pipeline::duality(exp)?;
    Ok(Outcome::ok(vec![duality_artifact(meta, format, &d)], duality_summary(&d)))
}

fn torsion(exp: &Experiment, meta: &Meta, format: Format, with_duality: bool) -> Result<Outcome, CliError> {
    let out = pipeline::torsion(exp, with_duality)?;
    let mut artifacts = vec![Artifact::new("torsion.json", json_document(meta, "torsion-report", &out))];
    let mut summary = format!(
        "log Tor estimate {:.3e} (expected {}), literal assembly {:.6}",
        out.report.estimate, out.report.expected, out.report.literal_estimate
    );
    if let Some(d) = &out.duality {
        artifacts.push(duality_artifact(meta, format, d));
        summary.push_str("; ");
        summary.push_str(&duality_summary(d));
    }
    Ok(Outcome::ok(artifacts, summary))
}

/// Residual bound for the anomaly identity.
pub const ANOMALY_TOL: f64 = 1e-9;

pub fn anomaly_suite(seed: u64, cases: usize) -> Result<Vec<AnomalyCheck>, CliError> {
    (0..cases as u64).map(|k| Ok(check_anomaly(&anomaly_case(seed, k))?)).collect()
}

fn verify_anomaly(exp: &Experiment, meta: &Meta, format: Format) -> Result<Outcome, CliError> {
    let checks = anomaly_suite(exp.config.seed, exp.config.anomaly_cases)?;
    let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let art = match format {
        Format::Json => Artifact::new("anomaly.json", json_document(meta, "anomaly", &checks)),
        Format::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .enumerate()
                .map(|(k, c)| vec![k.to_string(), num(c.log_lhs), num(c.log_rhs), num(c.residual)])
                .collect();
            Artifact::new("anomaly.csv", csv_document(meta, &["case", "log_lhs", "log_rhs", "residual"], &rows))
        }
    };
    let failure = (worst > ANOMALY_TOL).then(|| CliError::Numerical(format!("anomaly residual {worst:e} exceeds {ANOMALY_TOL:e}")));
    Ok(Outcome { artifacts: vec![art], summary: format!("{} cases, worst residual {worst:.3e}", checks.len()), failure })
}
