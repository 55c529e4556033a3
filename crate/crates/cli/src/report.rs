//! Checks, artifacts and the JSON run report.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "==")]
    Equal,
}

impl Comparison {
    /// False for NaN values.
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Less => value < threshold,
            Comparison::AtMost => value <= threshold,
            Comparison::Equal => value == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Less => "<",
            Comparison::AtMost => "<=",
            Comparison::Equal => "==",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Non-finite values serialize as `null` and never pass.
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        Self { name: name.to_owned(), value, threshold, comparison, pass: comparison.holds(value, threshold) }
    }
}

/// Everything an experiment produces besides the report header.
pub struct RunContext {
    out_dir: PathBuf,
    seed: u64,
    pub(crate) checks: Vec<Check>,
    pub(crate) findings: Map<String, Value>,
    pub(crate) artifacts: Vec<String>,
    pub(crate) warnings: Vec<String>,
}

impl RunContext {
    pub fn new(out_dir: PathBuf, seed: u64) -> Self {
        Self { out_dir, seed, checks: Vec::new(), findings: Map::new(), artifacts: Vec::new(), warnings: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn check(&mut self, name: &str, value: f64, comparison: Comparison, threshold: f64) {
        self.checks.push(Check::new(name, value, comparison, threshold));
    }

    pub fn finding(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.findings.insert(key.to_owned(), value);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("[WARN] {message}");
        self.warnings.push(message);
    }

    /// Writes `name` in the output directory through a temporary file that
    /// is renamed into place once complete.
    pub fn artifact(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut dyn Write) -> integrable_core::Result<()>,
    ) -> Result<(), LabError> {
        write_atomic(&self.out_dir, name, |w| write(w).map_err(LabError::Numerical))?;
        self.artifacts.push(name.to_owned());
        Ok(())
    }
}

pub(crate) fn write_atomic(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut dyn Write) -> Result<(), LabError>,
) -> Result<(), LabError> {
    let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", dir.join(name).display()));
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write(&mut w)?;
        w.flush().map_err(io)?;
    }
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub path: String,
    pub experiment: String,
    pub output_dir: String,
    pub seed: u64,
    pub checks: Vec<String>,
    pub strict: bool,
    /// Parameters after defaults were filled in.
    pub parameters: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefaultsTable {
    pub version: u32,
    pub seed: u64,
    pub experiments: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub revision: String,
    pub config: ConfigEcho,
    pub defaults: DefaultsTable,
    pub checks: Vec<Check>,
    pub findings: Map<String, Value>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        write_atomic(dir, "report.json", |w| {
            serde_json::to_writer_pretty(&mut *w, self).map_err(|e| LabError::Io(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| LabError::Io(e.to_string()))
        })
    }

    /// One line per check plus a verdict, for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: {:e} {} {:e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.comparison.symbol(),
                c.threshold
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("WARN {w}\n"));
        }
        if self.config.strict && !self.warnings.is_empty() {
            out.push_str("--strict: warnings count as failures\n");
        }
        out.push_str(&format!(
            "{}: {} ({} of {} checks passed, {} warnings, {:.2} s)\n",
            self.experiment,
            if self.pass { "pass" } else { "FAIL" },
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len(),
            self.warnings.len(),
            self.wall_time_s
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Comparison::Less.holds(1.0, 2.0));
        assert!(!Comparison::Less.holds(2.0, 2.0));
        assert!(Comparison::AtMost.holds(2.0, 2.0));
        assert!(Comparison::Equal.holds(7.0, 7.0));
        for c in [Comparison::Less, Comparison::AtMost, Comparison::Equal] {
            assert!(!c.holds(f64::NAN, 1.0));
        }
        assert!(!Check::new("x", f64::INFINITY, Comparison::Less, 1.0).pass);
    }

    #[test]
    fn check_serializes_in_declared_order() {
        let json = serde_json::to_string(&Check::new("drift", 1e-9, Comparison::Less, 1e-6)).unwrap();
        assert_eq!(json, r#"{"name":"drift","value":1e-9,"threshold":1e-6,"comparison":"<","pass":true}"#);
    }

    #[test]
    fn artifacts_are_written_whole() {
        let dir = tempfile::tempdir().unwrap();
        let mut cx = RunContext::new(dir.path().join("nested"), 1);
        cx.artifact("a.csv", |w| Ok(w.write_all(b"x,u\n1,2\n")?)).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("nested/a.csv")).unwrap(), "x,u\n1,2\n");
        assert_eq!(cx.artifacts, vec!["a.csv"]);
        // nothing but the artifact is left behind
        assert_eq!(fs::read_dir(dir.path().join("nested")).unwrap().count(), 1);
    }
}
