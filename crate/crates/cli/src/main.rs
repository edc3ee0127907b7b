use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use witten_lab::{run, write_artifacts, CliError, Command, Experiment, ExperimentConfig, Format};

/// Witten deformation experiments on the circle and the flat 2-torus.
#[derive(Parser)]
#[command(name = "witten-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration (see schemas/experiment-config.schema.json).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in experiment: circle-sin2 or torus-sin2-product (default circle-sin2).
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "config")]
    preset: Option<String>,
    /// Output directory (default: the config's output_dir, else ./witten-lab-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the tracking horizon T_max.
    #[arg(long, global = true, value_name = "R")]
    tmax: Option<f64>,
    /// Override the Fourier cutoff N (modes per circle factor).
    #[arg(long, global = true, value_name = "N")]
    modes: Option<usize>,
    /// Override the seed of randomized suites.
    #[arg(long, global = true, value_name = "K")]
    seed: Option<u64>,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Smallest eigenvalues of Δ^q(t) at the configured (q, t) pairs.
    Spectrum,
    /// Track eigenvalue branches on the t-grid and plot them.
    Branches,
    /// Classify the virtually small package and localize it at critical points.
    Package,
    /// Critical points, Morse-Smale certificate, Morse complex and a(t).
    Morse,
    /// Assemble log Tor(M) from the package, a(0) and the harmonic volumes.
    Torsion {
        /// Also report the Hodge-star duality residuals.
        #[arg(long)]
        duality: bool,
    },
    /// Hodge-star duality identities and package duality.
    Duality,
    /// Randomized check of the torsion anomaly identity.
    VerifyAnomaly,
}

fn resolve(c: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&c.config, &c.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset("circle-sin2")?,
    };
    if let Some(t) = c.tmax {
        cfg.grid.t_max = t;
        cfg.a_times.retain(|&s| s <= t);
    }
    if let Some(n) = c.modes {
        cfg.cutoff = n;
    }
    if let Some(k) = c.seed {
        cfg.seed = k;
    }
    if let Some(dir) = &c.out {
        cfg.output_dir = Some(dir.display().to_string());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Branches => Command::Branches,
        Cmd::Package => Command::Package,
        Cmd::Morse => Command::Morse,
        Cmd::Torsion { duality } => Command::Torsion { duality },
        Cmd::Duality => Command::Duality,
        Cmd::VerifyAnomaly => Command::VerifyAnomaly,
    };
    let result = resolve(&cli.common).and_then(|cfg| {
        let dir = PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| "witten-lab-out".into()));
        let exp = Experiment::new(cfg)?;
        let outcome = run(cmd, &exp, cli.common.format)?;
        write_artifacts(&dir, &outcome.artifacts)?;
        for a in &outcome.artifacts {
            println!("wrote {}", dir.join(&a.name).display());
        }
        println!("{}", outcome.summary);
        outcome.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
