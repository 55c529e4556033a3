//! End-to-end runs of the `integrable-lab` binary: exit codes, reports and
//! byte-for-byte reproducibility of the CSV artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_integrable-lab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_in(out: &Path, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--output-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    args.extend(["run", config.to_str().unwrap()]);
    lab(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    let all = r["checks"].as_array().unwrap();
    let hits: Vec<&Value> = all.iter().filter(|c| c["name"] == name).collect();
    assert_eq!(hits.len(), 1, "check {name} should appear exactly once in {all:?}");
    hits[0]
}

#[test]
fn list_experiments_prints_eight_sorted_rows_with_topics() {
    let o = lab(&["list-experiments"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8, "{text}");
    let names: Vec<&str> = rows.iter().map(|r| r.split_whitespace().next().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    assert_eq!(names, sorted);
    for r in &rows {
        let topic = r.split_whitespace().nth(1).unwrap();
        assert!(["finite-string", "infinite-string", "kdv"].contains(&topic), "{r}");
    }
    assert!(text.contains("dt=0.0001"), "defaults are listed");
}

#[test]
fn negative_dt_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "neg.toml", "experiment = \"kdv-conservation\"\n\n[parameters]\ndt = -1e-4\n");
    let o = run_in(&dir.path().join("out"), &cfg, &[]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("line 4") && err.contains("parameters.dt"), "{err}");
    // nothing is computed or written
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        ("unknown-param.toml", "experiment = \"string-modes\"\n[parameters]\nmodez = 3\n", "modez"),
        ("unknown-header.toml", "experiment = \"string-modes\"\nparamters = 1\n", "paramters"),
        ("unknown-experiment.toml", "experiment = \"string-sines\"\n", "string-sines"),
        (
            "zero-tolerance.toml",
            "experiment = \"string-modes\"\n[parameters]\nenergy_tolerance = 0.0\n",
            "energy_tolerance",
        ),
        ("unresolved.toml", "experiment = \"string-modes\"\n[parameters]\nmodes = 8\nintervals = 16\n", "intervals"),
        ("unknown-check.toml", "experiment = \"string-modes\"\nchecks = [\"nope\"]\n", "nope"),
        ("syntax.toml", "experiment = \n", "line 1"),
        (
            "recovery-needs-all.toml",
            "experiment = \"string-completeness\"\nchecks = [\"momentum-recovery\"]\n[parameters]\nremove = [2]\n",
            "momentum-recovery",
        ),
    ];
    for (name, body, needle) in cases {
        let o = run_in(&out, &write_config(dir.path(), name, body), &[]);
        assert_eq!(code(&o), 2, "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{name}: {}", stderr(&o));
    }
    let o = run_in(&out, &dir.path().join("absent.toml"), &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // evolving past the support margin leaves the computational window
    let cfg = write_config(dir.path(), "exit.toml", "experiment = \"line-remark2\"\n[parameters]\ntimes = [19.5]\n");
    let o = run_in(&dir.path().join("out"), &cfg, &[]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("domain margin"), "{}", stderr(&o));
}

#[test]
fn removing_f1_is_reported_incomplete() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(out.path(), &configs().join("string-completeness-drop-f1.toml"), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(out.path());
    assert_eq!(r["findings"]["complete"], false);
    assert_eq!(r["findings"]["numerical_rank"], 7);
    assert_eq!(check(&r, "expects-incomplete")["pass"], true);
    assert_eq!(r["pass"], true);

    // asking the reduced set to be complete is a check failure, not an error
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "experiment = \"string-completeness\"\nchecks = [\"expects-complete\"]\n[parameters]\nremove = [1]\n",
    );
    let o = run_in(&dir.path().join("out"), &cfg, &[]);
    assert_eq!(code(&o), 1);
    assert_eq!(check(&report(&dir.path().join("out")), "expects-complete")["pass"], false);
}

#[test]
fn kdv_conservation_defaults_pass() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in(out.path(), &configs().join("kdv-conservation.toml"), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(out.path());
    for name in ["I1-drift", "I2-drift", "I3-drift", "even-densities"] {
        let c = check(&r, name);
        assert_eq!(c["pass"], true, "{c}");
        assert!(c["value"].as_f64().unwrap() < c["threshold"].as_f64().unwrap());
    }
    assert_eq!(check(&r, "riccati-truncation-rate")["pass"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 5);
    assert_eq!(r["config"]["parameters"]["dt"], 1e-4);
    assert_eq!(r["defaults"]["experiments"].as_object().unwrap().len(), 8);
    for a in r["artifacts"].as_array().unwrap() {
        assert!(out.path().join(a.as_str().unwrap()).is_file(), "{a}");
    }
    let csv = fs::read_to_string(out.path().join("conserved.csv")).unwrap();
    assert!(csv.starts_with("t,I_1,I_2,I_3,H_direct\n"));
}

#[test]
fn report_keys_are_in_fixed_order() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_in(out.path(), &configs().join("line-gseries.toml"), &[])), 0);
    let text = fs::read_to_string(out.path().join("report.json")).unwrap();
    let keys = [
        "experiment",
        "revision",
        "config",
        "defaults",
        "checks",
        "findings",
        "warnings",
        "artifacts",
        "pass",
        "wall_time_s",
    ];
    let positions: Vec<usize> =
        keys.iter().map(|k| text.find(&format!("\n  \"{k}\":")).unwrap_or_else(|| panic!("{k} missing"))).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    let c = text.find("\"name\"").unwrap();
    let order = ["\"name\"", "\"value\"", "\"threshold\"", "\"comparison\"", "\"pass\""];
    let pos: Vec<usize> = order.iter().map(|k| c + text[c..].find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn strict_turns_warnings_into_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "w.toml",
        "experiment = \"kdv-conservation\"\n[parameters]\nsteps = 100\nstride = 50\nriccati_order = 10\n",
    );
    let out = dir.path().join("out");
    assert_eq!(code(&run_in(&out, &cfg, &[])), 0);
    assert!(!report(&out)["warnings"].as_array().unwrap().is_empty());
    assert_eq!(code(&run_in(&out, &cfg, &["--strict"])), 1);
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("string-modes.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run_in(&a, &cfg, &["--seed", "11"])), 0);
    assert_eq!(code(&run_in(&b, &cfg, &["--seed", "12"])), 0);
    assert_eq!(report(&a)["config"]["seed"], 11);
    let modes = |d: &Path| fs::read(d.join("modes_initial.csv")).unwrap();
    assert_ne!(modes(&a), modes(&b));
}

#[test]
fn bundled_configs_pass_and_reproduce_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut entries: Vec<PathBuf> = fs::read_dir(configs())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    entries.sort();
    assert!(entries.len() >= 8);
    for cfg in entries {
        let stem = cfg.file_stem().unwrap().to_str().unwrap().to_owned();
        let (a, b) = (dir.path().join(format!("{stem}-a")), dir.path().join(format!("{stem}-b")));
        for out in [&a, &b] {
            let o = run_in(out, &cfg, &[]);
            assert_eq!(code(&o), 0, "{stem}: {}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
        }
        let artifacts = report(&a)["artifacts"].as_array().unwrap().clone();
        assert!(!artifacts.is_empty(), "{stem}");
        for name in artifacts {
            let name = name.as_str().unwrap();
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{stem}/{name} differs");
        }
    }
}
