//! Output documents. Every file carries the tool version and the digest of
//! the configuration that produced it; nothing time- or host-dependent is
//! written, so identical configurations give byte-identical files.

use serde::Serialize;

pub const TOOL: &str = "witten-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
}

impl Meta {
    pub fn new(command: &str, digest: &str) -> Self {
        Self { tool: TOOL, version: VERSION, command: command.into(), config_sha256: digest.into() }
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    #[serde(flatten)]
    meta: &'a Meta,
    schema: String,
    result: &'a R,
}

/// Pretty JSON document `{tool, version, command, config_sha256, schema, result}`.
pub fn json_document<R: Serialize>(meta: &Meta, schema: &str, result: &R) -> String {
    let env = Envelope { meta, schema: format!("{TOOL}/{schema}/v1"), result };
    let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
    s.push('\n');
    s
}

/// CSV with two `#` header lines carrying the metadata.
pub fn csv_document(meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("# {} {} {}\n# config_sha256 {}\n", meta.tool, meta.version, meta.command, meta.config_sha256);
    s.push_str(&header.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }
}
