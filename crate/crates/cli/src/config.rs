//! Experiment configuration files.
//!
//! A config is a TOML document with a small fixed header and a
//! `[parameters]` table whose schema belongs to the experiment:
//!
//! ```toml
//! experiment = "kdv-conservation"
//! output_dir = "runs/kdv"        # optional
//! seed = 7                       # optional
//! checks = ["I1-drift"]          # optional; default is the experiment's list
//!
//! [parameters]
//! dt = 1e-4
//! ```
//!
//! Missing parameters come from the defaults table; unknown keys anywhere are
//! rejected. Everything is validated before any computation starts.

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub experiment: String,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    /// Checked against the experiment's schema in a second pass.
    #[serde(default)]
    pub parameters: Option<toml::Table>,
}

#[derive(Deserialize)]
struct Typed<P> {
    #[serde(default)]
    parameters: P,
}

/// Parameter block of one experiment. `Default` is the defaults-table entry.
pub trait Parameters: Serialize + DeserializeOwned + Default {
    fn validate(&self, v: &mut Validator);
}

fn toml_error(e: toml::de::Error) -> ConfigError {
    ConfigError(e.to_string().trim_end().to_owned())
}

pub fn parse_header(text: &str) -> Result<Header, ConfigError> {
    toml::from_str(text).map_err(toml_error)
}

pub fn parse_parameters<P: Parameters>(text: &str) -> Result<P, ConfigError> {
    toml::from_str::<Typed<P>>(text).map(|t| t.parameters).map_err(toml_error)
}

/// One-based line of `key = …`, looked up inside `[parameters]` unless
/// `top_level` is set.
pub fn line_of(text: &str, key: &str, top_level: bool) -> Option<usize> {
    let mut in_parameters = false;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_parameters = t.trim_start_matches('[').trim_end_matches(']').trim() == "parameters";
            continue;
        }
        if in_parameters == top_level {
            continue;
        }
        if let Some((k, _)) = t.split_once('=') {
            let k = k.trim().trim_matches('"');
            let k = k.strip_prefix("parameters.").unwrap_or(k);
            if k == key {
                return Some(i + 1);
            }
        }
    }
    None
}

/// Collects every semantic problem in a parameter block, each located at the
/// line where the key appears (or flagged as a default when it does not).
pub struct Validator<'a> {
    text: &'a str,
    errors: Vec<String>,
}

impl<'a> Validator<'a> {
    pub fn new(text: &'a str) -> Self {
        Self { text, errors: Vec::new() }
    }

    pub fn fail(&mut self, key: &str, reason: impl fmt::Display) {
        let at = match line_of(self.text, key, false) {
            Some(line) => format!("line {line}"),
            None => "default".to_owned(),
        };
        self.errors.push(format!("{at}: parameters.{key}: {reason}"));
    }

    pub fn require(&mut self, key: &str, ok: bool, reason: impl fmt::Display) {
        if !ok {
            self.fail(key, reason);
        }
    }

    pub fn finite(&mut self, key: &str, x: f64) {
        self.require(key, x.is_finite(), format!("must be finite, got {x}"));
    }

    pub fn positive(&mut self, key: &str, x: f64) {
        self.require(key, x.is_finite() && x > 0.0, format!("must be finite and > 0, got {x}"));
    }

    pub fn non_negative(&mut self, key: &str, x: f64) {
        self.require(key, x.is_finite() && x >= 0.0, format!("must be finite and >= 0, got {x}"));
    }

    pub fn at_least(&mut self, key: &str, n: usize, min: usize) {
        self.require(key, n >= min, format!("must be >= {min}, got {n}"));
    }

    pub fn power_of_two(&mut self, key: &str, n: usize, min: usize) {
        self.require(key, n >= min && n.is_power_of_two(), format!("must be a power of two >= {min}, got {n}"));
    }

    pub fn finish(self) -> Result<(), ConfigError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(self.errors.join("\n")))
        }
    }
}

/// The requested checks, or `defaults` when the config lists none. Names must
/// come from `available` and may appear only once.
pub fn select_checks(
    text: &str,
    requested: Option<&[String]>,
    available: &[&'static str],
    defaults: &[&'static str],
) -> Result<Vec<&'static str>, ConfigError> {
    let Some(requested) = requested else {
        return Ok(defaults.to_vec());
    };
    let at = line_of(text, "checks", true).map_or_else(String::new, |l| format!("line {l}: "));
    if requested.is_empty() {
        return Err(ConfigError(format!("{at}checks: list is empty; omit it to run the default checks")));
    }
    let mut out: Vec<&'static str> = Vec::with_capacity(requested.len());
    for name in requested {
        let Some(&known) = available.iter().find(|a| **a == name) else {
            return Err(ConfigError(format!(
                "{at}checks: unknown check {name:?} for these parameters; available: {}",
                available.join(", ")
            )));
        };
        if out.contains(&known) {
            return Err(ConfigError(format!("{at}checks: {name:?} listed twice")));
        }
        out.push(known);
    }
    Ok(out)
}
