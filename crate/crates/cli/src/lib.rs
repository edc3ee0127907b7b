//! Experiment pipeline behind the `witten-lab` command-line tool.
//!
//! An [`ExperimentConfig`] names a manifold, a Morse function and the
//! numerical parameters; [`Experiment`] assembles the truncated de Rham
//! complex, and the functions in [`pipeline`] run branch tracking, Morse
//! data, the integration determinant and the torsion assembly on top of it.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod svg;

use std::path::Path;

pub use commands::{run, Command, Outcome};
pub use config::{ExperimentConfig, FunctionSpec, GridSpec, ManifoldTag, Tolerances};
pub use error::CliError;
pub use output::{Artifact, Format};
pub use pipeline::Experiment;

/// Writes artifacts into `dir`, creating it if needed, in the given order.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}
