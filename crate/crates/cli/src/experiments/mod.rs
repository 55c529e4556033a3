//! The closed set of experiments and the versioned defaults table.

mod kdv;
mod line;
mod string;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::Value;

use crate::config::{self, Header, Parameters, Validator};
use crate::report::{ConfigEcho, DefaultsTable, RunContext, RunReport};
use crate::{logger, LabError, Overrides, REVISION};

/// Bumped whenever a default parameter or tolerance changes.
pub const DEFAULTS_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0x5eed_1e55;

pub(crate) trait Experiment {
    const NAME: &'static str;
    /// Which system the experiment is about: finite-string, infinite-string or kdv.
    const TOPIC: &'static str;
    type Params: Parameters;

    /// Checks that can be requested for these parameters.
    fn available_checks(p: &Self::Params) -> Vec<&'static str>;

    /// Checks run when the config does not list any.
    fn default_checks(p: &Self::Params) -> Vec<&'static str> {
        Self::available_checks(p)
    }

    /// Must record every check in `available_checks`.
    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError>;
}

pub struct Invocation<'a> {
    pub text: &'a str,
    pub origin: &'a str,
    pub header: &'a Header,
    pub overrides: &'a Overrides,
}

pub struct Entry {
    pub name: &'static str,
    pub topic: &'static str,
    pub defaults: fn() -> Value,
    pub default_checks: fn() -> Vec<&'static str>,
    pub run: fn(&Invocation) -> Result<RunReport, LabError>,
}

fn entry<E: Experiment>() -> Entry {
    Entry {
        name: E::NAME,
        topic: E::TOPIC,
        defaults: || serde_json::to_value(E::Params::default()).expect("parameters serialize"),
        default_checks: || E::default_checks(&E::Params::default()),
        run: execute::<E>,
    }
}

/// All experiments, sorted by name.
pub fn registry() -> Vec<Entry> {
    let mut all = vec![
        entry::<string::StringModes>(),
        entry::<string::StringHj>(),
        entry::<string::StringCompleteness>(),
        entry::<line::LineGSeries>(),
        entry::<line::LineRemark2>(),
        entry::<kdv::KdvConservation>(),
        entry::<kdv::KdvScattering>(),
        entry::<kdv::KdvActionHamiltonian>(),
    ];
    all.sort_by_key(|e| e.name);
    all
}

pub fn defaults_table() -> DefaultsTable {
    DefaultsTable {
        version: DEFAULTS_VERSION,
        seed: DEFAULT_SEED,
        experiments: registry().iter().map(|e| (e.name.to_owned(), (e.defaults)())).collect(),
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Plain-text table: name, topic, default checks, parameter defaults.
pub fn list_experiments() -> String {
    let rows: Vec<[String; 4]> = registry()
        .iter()
        .map(|e| {
            let params = match (e.defaults)() {
                Value::Object(m) => m.iter().map(|(k, v)| format!("{k}={}", render(v))).collect::<Vec<_>>().join(" "),
                other => render(&other),
            };
            [e.name.to_owned(), e.topic.to_owned(), (e.default_checks)().join(","), params]
        })
        .collect();
    let header = ["EXPERIMENT", "TOPIC", "CHECKS", "PARAMETERS (defaults)"].map(str::to_owned);
    let mut width = [0usize; 3];
    for r in std::iter::once(&header).chain(&rows) {
        for c in 0..3 {
            width[c] = width[c].max(r[c].chars().count());
        }
    }
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        for c in 0..3 {
            out.push_str(&format!("{:<w$}  ", r[c], w = width[c]));
        }
        out.push_str(&r[3]);
        out.push('\n');
    }
    out
}

/// Repeated warnings (e.g. one per observation) are reported once with a count.
fn collapse(raw: Vec<String>) -> Vec<String> {
    let mut seen: Vec<(String, usize)> = Vec::new();
    for w in raw {
        match seen.iter_mut().find(|(m, _)| *m == w) {
            Some((_, n)) => *n += 1,
            None => seen.push((w, 1)),
        }
    }
    seen.into_iter().map(|(m, n)| if n == 1 { m } else { format!("{m} (x{n})") }).collect()
}

fn execute<E: Experiment>(inv: &Invocation) -> Result<RunReport, LabError> {
    let params: E::Params = config::parse_parameters(inv.text)?;
    let mut v = Validator::new(inv.text);
    params.validate(&mut v);
    v.finish()?;
    let checks = config::select_checks(
        inv.text,
        inv.header.checks.as_deref(),
        &E::available_checks(&params),
        &E::default_checks(&params),
    )?;

    let seed = inv.overrides.seed.or(inv.header.seed).unwrap_or(DEFAULT_SEED);
    let out_dir = inv
        .overrides
        .output_dir
        .clone()
        .or_else(|| inv.header.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(E::NAME));

    let parameters = serde_json::to_value(&params).map_err(|e| LabError::Io(e.to_string()))?;
    let mut cx = RunContext::new(out_dir.clone(), seed);
    logger::drain();
    let start = Instant::now();
    let outcome = E::run(&params, &mut cx);
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut raw = logger::drain();
    raw.append(&mut cx.warnings);
    let warnings = collapse(raw);
    outcome?;

    let mut selected = Vec::with_capacity(checks.len());
    for name in &checks {
        let check = cx
            .checks
            .iter()
            .find(|c| c.name == *name)
            .cloned()
            .ok_or_else(|| LabError::Io(format!("internal: experiment {} did not record check {name}", E::NAME)))?;
        selected.push(check);
    }
    let strict_failure = inv.overrides.strict && !warnings.is_empty();
    let pass = selected.iter().all(|c| c.pass) && !strict_failure;

    let report = RunReport {
        experiment: E::NAME.to_owned(),
        revision: REVISION.to_owned(),
        config: ConfigEcho {
            path: inv.origin.to_owned(),
            experiment: E::NAME.to_owned(),
            output_dir: out_dir.display().to_string(),
            seed,
            checks: checks.iter().map(|c| c.to_string()).collect(),
            strict: inv.overrides.strict,
            parameters,
        },
        defaults: defaults_table(),
        checks: selected,
        findings: cx.findings,
        warnings,
        artifacts: cx.artifacts,
        pass,
        wall_time_s,
    };
    report.write(&out_dir)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_warnings_collapse() {
        let raw = ["a", "b", "a", "a"].map(str::to_owned).to_vec();
        assert_eq!(collapse(raw), vec!["a (x3)".to_owned(), "b".to_owned()]);
    }

    #[test]
    fn closed_set_sorted() {
        let names: Vec<&str> = registry().iter().map(|e| e.name).collect();
        assert_eq!(
            names,
            [
                "kdv-action-hamiltonian",
                "kdv-conservation",
                "kdv-scattering",
                "line-gseries",
                "line-remark2",
                "string-completeness",
                "string-hj",
                "string-modes"
            ]
        );
        assert!(registry().iter().all(|e| ["finite-string", "infinite-string", "kdv"].contains(&e.topic)));
    }

    fn defaults_are_consistent<E: Experiment>() {
        let p = E::Params::default();
        let mut v = Validator::new("");
        p.validate(&mut v);
        assert!(v.finish().is_ok(), "{}", E::NAME);
        let available = E::available_checks(&p);
        assert!(E::default_checks(&p).iter().all(|c| available.contains(c)), "{}", E::NAME);
    }

    #[test]
    fn defaults_validate_and_default_checks_are_available() {
        defaults_are_consistent::<string::StringModes>();
        defaults_are_consistent::<string::StringHj>();
        defaults_are_consistent::<string::StringCompleteness>();
        defaults_are_consistent::<line::LineGSeries>();
        defaults_are_consistent::<line::LineRemark2>();
        defaults_are_consistent::<kdv::KdvConservation>();
        defaults_are_consistent::<kdv::KdvScattering>();
        defaults_are_consistent::<kdv::KdvActionHamiltonian>();
        let table = defaults_table();
        assert_eq!(table.experiments.len(), 8);
        assert!(table.experiments.values().all(Value::is_object));
    }

    #[test]
    fn listing_has_one_row_per_experiment() {
        let text = list_experiments();
        assert_eq!(text.lines().count(), 9);
        assert!(text.lines().nth(1).unwrap().starts_with("kdv-action-hamiltonian"));
    }
}
