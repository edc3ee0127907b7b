//! Experiment configuration: JSON documents, named presets and validation.

use std::f64::consts::PI;
use std::path::Path;

use derham_core::{DeRhamComplex, Manifold, TrigPoly, TrigPolySpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Largest accepted cutoff per manifold; dense eigensolves scale as `(2N+1)^{3n}`.
pub const MAX_CUTOFF_CIRCLE: usize = 256;
pub const MAX_CUTOFF_TORUS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldTag {
    Circle,
    Torus,
}

impl From<ManifoldTag> for Manifold {
    fn from(m: ManifoldTag) -> Self {
        match m {
            ManifoldTag::Circle => Manifold::Circle,
            ManifoldTag::Torus => Manifold::FlatTorus,
        }
    }
}

/// Either a named function (`sin2`, `sin2-product`, `zero`) or explicit terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named { preset: String },
    Terms(TrigPolySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub zero_tol: f64,
    pub decay_ratio: f64,
    pub gap_min: f64,
    pub h_min: f64,
    pub coupling_tol: f64,
    pub cluster_tol: f64,
    pub overlap_min: f64,
    pub ball_radius: f64,
    pub mass_min: f64,
    pub quadrature_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_tol: 1e-9,
            decay_ratio: 0.5,
            gap_min: 10.0,
            h_min: 1e-6,
            coupling_tol: 1e-7,
            cluster_tol: 1e-6,
            overlap_min: 0.9,
            ball_radius: PI / 8.0,
            mass_min: 0.5,
            quadrature_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSpec {
    pub degrees: Vec<usize>,
    pub times: Vec<f64>,
    /// Number of smallest eigenvalues reported per `(q, t)`.
    pub count: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self { degrees: vec![0], times: vec![0.0], count: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldTag,
    pub function: FunctionSpec,
    /// Fourier cutoff `N` per circle factor.
    pub cutoff: usize,
    pub grid: GridSpec,
    /// Branches tracked beyond the `c_q` needed for the package.
    #[serde(default = "default_extra")]
    pub extra_branches: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    /// Times at which `a(t)` is evaluated; defaults to a spread over `[0, T_max]`.
    #[serde(default)]
    pub a_times: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cases")]
    pub anomaly_cases: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_extra() -> usize {
    6
}

fn default_cases() -> usize {
    200
}

pub const PRESETS: [&str; 2] = ["circle-sin2", "torus-sin2-product"];

impl ExperimentConfig {
    /// The worked examples: `sin 2θ` on the circle and `sin 2θ₁ + sin 2θ₂`
    /// on the flat torus, with horizons the respective cutoffs resolve.
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let (manifold, function, cutoff, t_max, a_times) = match name {
            "circle-sin2" => (ManifoldTag::Circle, "sin2", 48, 15.0, vec![0.0, 1.0, 2.5, 5.0, 10.0, 15.0]),
            "torus-sin2-product" => (ManifoldTag::Torus, "sin2-product", 12, 1.5, vec![0.0, 0.5, 1.0, 1.5]),
            other => {
                return Err(CliError::Config(format!("unknown preset {other:?}; known presets: {}", PRESETS.join(", "))))
            }
        };
        Ok(Self {
            manifold,
            function: FunctionSpec::Named { preset: function.into() },
            cutoff,
            grid: GridSpec { t_max, step: 0.25 },
            extra_branches: default_extra(),
            tolerances: Tolerances::default(),
            spectrum: SpectrumSpec::default(),
            a_times,
            seed: 0,
            anomaly_cases: default_cases(),
            output_dir: None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn function_poly(&self) -> Result<TrigPoly<f64>, CliError> {
        let arity = Manifold::from(self.manifold).dim();
        let p = match &self.function {
            FunctionSpec::Named { preset } => match (preset.as_str(), self.manifold) {
                ("sin2", ManifoldTag::Circle) => TrigPoly::sin2(),
                ("sin2-product", ManifoldTag::Torus) => TrigPoly::sin2_product(),
                ("zero", _) => TrigPoly::zero(arity),
                (other, m) => return Err(CliError::Config(format!("function {other:?} is not defined on {m:?}"))),
            },
            FunctionSpec::Terms(spec) => spec.build().map_err(CliError::Config)?,
        };
        if p.arity() != arity {
            return Err(CliError::Config(format!("function arity {} does not match the manifold", p.arity())));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let f = self.function_poly()?;
        let min = DeRhamComplex::min_cutoff(&f);
        let max = match self.manifold {
            ManifoldTag::Circle => MAX_CUTOFF_CIRCLE,
            ManifoldTag::Torus => MAX_CUTOFF_TORUS,
        };
        if self.cutoff < min || self.cutoff > max {
            return Err(CliError::Config(format!("cutoff {} outside [{min}, {max}]", self.cutoff)));
        }
        let g = self.grid;
        if !(g.t_max > 0.0 && g.step > 0.0 && g.step <= g.t_max / 2.0) || !g.t_max.is_finite() {
            return Err(CliError::Config(format!("grid needs 0 < step ≤ t_max/2, got {g:?}")));
        }
        let t = &self.tolerances;
        let named = [
            ("zero_tol", t.zero_tol),
            ("decay_ratio", t.decay_ratio),
            ("gap_min", t.gap_min),
            ("h_min", t.h_min),
            ("coupling_tol", t.coupling_tol),
            ("cluster_tol", t.cluster_tol),
            ("overlap_min", t.overlap_min),
            ("ball_radius", t.ball_radius),
            ("mass_min", t.mass_min),
            ("quadrature_rel_tol", t.quadrature_rel_tol),
        ];
        if let Some((name, v)) = named.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(CliError::Config(format!("tolerance {name} must be positive, got {v}")));
        }
        if t.decay_ratio >= 1.0 || t.overlap_min > 1.0 || t.mass_min > 1.0 {
            return Err(CliError::Config("decay_ratio must be < 1, overlap_min and mass_min ≤ 1".into()));
        }
        let n = Manifold::from(self.manifold).dim();
        if let Some(&q) = self.spectrum.degrees.iter().find(|&&q| q > n) {
            return Err(CliError::Config(format!("spectrum degree {q} exceeds the dimension {n}")));
        }
        if self.spectrum.count == 0 || self.spectrum.times.iter().chain(&self.a_times).any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Config("spectrum count must be positive and times finite and non-negative".into()));
        }
        if self.a_times.iter().any(|&t| t > g.t_max) {
            return Err(CliError::Config("a_times must lie in [0, t_max]".into()));
        }
        Ok(())
    }

    /// `a_times`, or `{0, T/4, T/2, 3T/4, T}` when unset.
    pub fn a_times(&self) -> Vec<f64> {
        if self.a_times.is_empty() {
            (0..=4).map(|k| self.grid.t_max * k as f64 / 4.0).collect()
        } else {
            self.a_times.clone()
        }
    }

    /// Hex SHA-256 of the canonical JSON serialization, excluding the
    /// output directory (which does not affect any result).
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(&Self { output_dir: None, ..self.clone() }).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
