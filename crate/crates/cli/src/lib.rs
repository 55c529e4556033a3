//! Batch runner for the integrable-core experiments.
//!
//! One invocation runs one experiment from a TOML config, writes its CSV
//! artifacts and `report.json` into the output directory, and maps the
//! outcome onto an exit code: 0 all checks pass, 1 a check failed, 2 the
//! configuration is invalid, 3 the computation itself failed.

pub mod config;
pub mod experiments;
pub mod logger;
pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};

pub use experiments::{defaults_table, list_experiments, registry, DEFAULTS_VERSION, DEFAULT_SEED};
pub use report::{Check, Comparison, RunReport};

/// Source revision baked in at build time.
pub const REVISION: &str = env!("LAB_REVISION");

#[derive(Debug)]
pub enum LabError {
    Config(String),
    Numerical(integrable_core::Error),
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numerical(_) | LabError::Io(_) => 3,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "configuration error: {m}"),
            LabError::Numerical(e) => write!(f, "numerical failure: {e}"),
            LabError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<integrable_core::Error> for LabError {
    fn from(e: integrable_core::Error) -> Self {
        LabError::Numerical(e)
    }
}

impl From<config::ConfigError> for LabError {
    fn from(e: config::ConfigError) -> Self {
        LabError::Config(e.0)
    }
}

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict: bool,
}

pub fn exit_code(outcome: &Result<RunReport, LabError>) -> i32 {
    match outcome {
        Ok(r) if r.pass => 0,
        Ok(_) => 1,
        Err(e) => e.exit_code(),
    }
}

/// Reads, validates and runs the config at `path`.
pub fn run_config(path: &Path, overrides: &Overrides) -> Result<RunReport, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("{}: cannot read config: {e}", path.display())))?;
    run_config_text(&text, &path.display().to_string(), overrides)
}

pub fn run_config_text(text: &str, origin: &str, overrides: &Overrides) -> Result<RunReport, LabError> {
    let located = |e: config::ConfigError| LabError::Config(format!("{origin}: {e}"));
    let header = config::parse_header(text).map_err(located)?;
    let entry = registry().into_iter().find(|e| e.name == header.experiment).ok_or_else(|| {
        let at = config::line_of(text, "experiment", true).map_or_else(String::new, |l| format!("line {l}: "));
        let known: Vec<&str> = registry().iter().map(|e| e.name).collect();
        LabError::Config(format!(
            "{origin}: {at}experiment: unknown experiment {:?}; expected one of {}",
            header.experiment,
            known.join(", ")
        ))
    })?;
    (entry.run)(&experiments::Invocation { text, origin, header: &header, overrides }).map_err(|e| match e {
        LabError::Config(m) => LabError::Config(format!("{origin}: {m}")),
        other => other,
    })
}
