//! Finite string: sine modes, mode energies, Hamilton–Jacobi reconstruction,
//! involution and completeness of the mode-energy set.

use std::f64::consts::PI;

use integrable_core::canonical::{
    analytic_poisson_bracket, completeness_jacobian, completeness_report, evolve, involution_matrix, poisson_bracket,
    recover_momenta, CanonicalState, NewtonOptions, Observable,
};
use integrable_core::csvio;
use integrable_core::string::{
    exact_mode_evolution, field_energy_integral, hamilton_residual, hj_trajectory, mode_energy, sine_modes,
    string_hamiltonian_system, string_observable_set, ModeState, SeparationData, StringField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::config::{Parameters, Validator};
use crate::report::{Comparison, RunContext};
use crate::LabError;

fn random_modes(rng: &mut ChaCha8Rng, modes: usize, amplitude: f64) -> ModeState {
    let a = (0..modes).map(|_| rng.random_range(-amplitude..amplitude)).collect();
    let adot = (0..modes).map(|_| rng.random_range(-amplitude..amplitude)).collect();
    ModeState::new(a, adot, 0.0).expect("finite amplitudes")
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn energy_header(modes: usize) -> Vec<String> {
    std::iter::once("t".to_owned()).chain((1..=modes).map(|n| format!("E_{n}"))).collect()
}

fn write_energy_rows(cx: &mut RunContext, name: &str, modes: usize, rows: &[Vec<f64>]) -> Result<(), LabError> {
    let header = energy_header(modes);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    cx.artifact(name, |w| csvio::write_rows(w, &header, rows))
}

// ---------------------------------------------------------------------------

pub(crate) struct StringModes;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct StringModesParams {
    pub modes: usize,
    pub intervals: usize,
    pub amplitude: f64,
    pub horizon: f64,
    pub samples: usize,
    pub transform_tolerance: f64,
    pub energy_tolerance: f64,
}

impl Default for StringModesParams {
    fn default() -> Self {
        Self {
            modes: 8,
            intervals: 256,
            amplitude: 0.5,
            horizon: 100.0,
            samples: 50,
            transform_tolerance: 1e-10,
            energy_tolerance: 1e-12,
        }
    }
}

impl Parameters for StringModesParams {
    fn validate(&self, v: &mut Validator) {
        v.at_least("modes", self.modes, 1);
        v.require(
            "intervals",
            self.intervals > 2 * self.modes,
            format!("must exceed 2·modes = {} to resolve every mode, got {}", 2 * self.modes, self.intervals),
        );
        v.positive("amplitude", self.amplitude);
        v.non_negative("horizon", self.horizon);
        v.at_least("samples", self.samples, 1);
        v.positive("transform_tolerance", self.transform_tolerance);
        v.positive("energy_tolerance", self.energy_tolerance);
    }
}

impl Experiment for StringModes {
    const NAME: &'static str = "string-modes";
    const TOPIC: &'static str = "finite-string";
    type Params = StringModesParams;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec!["mode-transform", "energy-integral", "mode-energy-drift"]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cx.seed());
        let m0 = random_modes(&mut rng, p.modes, p.amplitude);
        let field = StringField::from_modes(&m0, p.intervals)?;
        let recovered = sine_modes(&field, p.modes)?;
        cx.check("mode-transform", recovered.max_difference(&m0), Comparison::Less, p.transform_tolerance);

        // ∫-form energies are π² times the mode energies
        let e0 = m0.energies();
        let scale = max_abs(e0.iter().copied());
        let mut integral_err = 0.0f64;
        for n in 1..=p.modes {
            let direct = field_energy_integral(&field, n)? / (PI * PI);
            integral_err = integral_err.max((direct - e0[n - 1]).abs() / scale);
        }
        cx.check("energy-integral", integral_err, Comparison::Less, p.transform_tolerance);

        // exact flow, re-sampled through the field each time
        let mut rows = vec![std::iter::once(0.0).chain(e0.iter().copied()).collect::<Vec<f64>>()];
        let mut drift = 0.0f64;
        let mut last = m0.clone();
        for j in 1..=p.samples {
            let t = p.horizon * j as f64 / p.samples as f64;
            let m = exact_mode_evolution(&m0, t);
            let resampled = sine_modes(&StringField::from_modes(&m, p.intervals)?, p.modes)?;
            let e = resampled.energies();
            drift = drift.max(max_abs(e.iter().zip(&e0).map(|(a, b)| a - b)) / scale);
            rows.push(std::iter::once(t).chain(e).collect());
            last = m;
        }
        cx.check("mode-energy-drift", drift, Comparison::Less, p.energy_tolerance);

        cx.finding("hamiltonian", m0.hamiltonian());
        cx.finding("mode_energies", &e0);
        cx.artifact("modes_initial.csv", |w| csvio::write_modes(w, &m0))?;
        cx.artifact("modes_final.csv", |w| csvio::write_modes(w, &last))?;
        let x = field.grid();
        cx.artifact("field_u.csv", |w| csvio::write_field(w, "u", &x, field.u()))?;
        cx.artifact("field_v.csv", |w| csvio::write_field(w, "u_t", &x, field.v()))?;
        write_energy_rows(cx, "mode_energies.csv", p.modes, &rows)
    }
}

// ---------------------------------------------------------------------------

pub(crate) struct StringHj;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct StringHjParams {
    pub modes: usize,
    pub amplitude: f64,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub hj_times: Vec<f64>,
    /// Step of the central stencil used to test Hamilton's equations.
    pub residual_step: f64,
    pub energy_tolerance: f64,
    pub drift_tolerance: f64,
    pub hj_tolerance: f64,
    pub residual_tolerance: f64,
}

impl Default for StringHjParams {
    fn default() -> Self {
        Self {
            modes: 8,
            amplitude: 0.5,
            dt: 1e-3,
            steps: 100_000,
            stride: 10,
            hj_times: vec![0.0, 0.5, 3.3, 50.0, 1000.0],
            residual_step: 1e-3,
            energy_tolerance: 1e-12,
            drift_tolerance: 1e-6,
            hj_tolerance: 1e-10,
            residual_tolerance: 1e-8,
        }
    }
}

impl Parameters for StringHjParams {
    fn validate(&self, v: &mut Validator) {
        v.at_least("modes", self.modes, 1);
        v.positive("amplitude", self.amplitude);
        v.positive("dt", self.dt);
        if self.dt.is_finite() && self.dt > 0.0 {
            v.require(
                "dt",
                self.modes as f64 * self.dt < 2.0,
                format!("modes·dt = {} must be < 2 for a stable Störmer–Verlet step", self.modes as f64 * self.dt),
            );
        }
        v.at_least("steps", self.steps, 1);
        v.at_least("stride", self.stride, 1);
        v.require("stride", self.stride <= self.steps, "must not exceed steps");
        v.require("hj_times", !self.hj_times.is_empty(), "must list at least one time");
        v.require("hj_times", self.hj_times.iter().all(|t| t.is_finite()), "times must be finite");
        v.positive("residual_step", self.residual_step);
        v.positive("energy_tolerance", self.energy_tolerance);
        v.positive("drift_tolerance", self.drift_tolerance);
        v.positive("hj_tolerance", self.hj_tolerance);
        v.positive("residual_tolerance", self.residual_tolerance);
    }
}

impl Experiment for StringHj {
    const NAME: &'static str = "string-hj";
    const TOPIC: &'static str = "finite-string";
    type Params = StringHjParams;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec![
            "exact-flow-drift",
            "verlet-secular-drift",
            "verlet-oscillation-bound",
            "hj-vs-exact",
            "hamilton-equations",
        ]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let n = p.modes;
        let mut rng = ChaCha8Rng::seed_from_u64(cx.seed());
        let m0 = random_modes(&mut rng, n, p.amplitude);
        let e0 = m0.energies();
        let scale = max_abs(e0.iter().copied());
        let horizon = p.dt * p.steps as f64;

        let mut exact_drift = 0.0f64;
        for t in [0.37 * horizon, horizon, 1e2 * horizon] {
            let e = exact_mode_evolution(&m0, t).energies();
            exact_drift = exact_drift.max(max_abs(e.iter().zip(&e0).map(|(a, b)| a - b)) / scale);
        }
        cx.check("exact-flow-drift", exact_drift, Comparison::Less, p.energy_tolerance);

        // Kick-drift-kick conserves ½(p² + n²(1 − (n dt/2)²) q²) exactly, so
        // secular drift is measured on that; the raw energy only oscillates.
        let sys = string_hamiltonian_system(n)?;
        let traj = evolve(&sys, &m0.to_canonical(), p.dt, p.steps, p.stride)?;
        let dt = p.dt;
        let shadow = |s: &CanonicalState| -> f64 {
            (0..n)
                .map(|i| {
                    let w = (i + 1) as f64;
                    0.5 * (s.p()[i].powi(2) + w * w * (1.0 - (w * dt / 2.0).powi(2)) * s.q()[i].powi(2))
                })
                .sum()
        };
        let (h0, s0) = (sys.energy(traj.first()), shadow(traj.first()));
        let mut rows = Vec::with_capacity(traj.len());
        let (mut secular, mut oscillation) = (0.0f64, 0.0f64);
        for s in traj.states() {
            let (h, sh) = (sys.energy(s), shadow(s));
            secular = secular.max((sh - s0).abs() / s0);
            oscillation = oscillation.max((h - h0).abs() / h0);
            rows.push(vec![s.t(), h, sh]);
        }
        let bound = (n as f64 * dt / 2.0).powi(2);
        cx.check("verlet-secular-drift", secular, Comparison::Less, p.drift_tolerance);
        cx.check("verlet-oscillation-bound", oscillation, Comparison::AtMost, bound);

        let (sep, beta) = SeparationData::from_modes(&m0);
        let hj = hj_trajectory(&sep, &beta)?;
        let mut hj_rows = Vec::with_capacity(p.hj_times.len());
        let mut hj_err = 0.0f64;
        let mut residual = 0.0f64;
        for &t in &p.hj_times {
            let err = hj.at(t).max_difference(&exact_mode_evolution(&m0, t));
            let r = hamilton_residual(&hj, t, p.residual_step);
            hj_err = hj_err.max(err);
            residual = residual.max(r.coordinate.max(r.momentum));
            hj_rows.push(vec![t, err, r.coordinate, r.momentum]);
        }
        cx.check("hj-vs-exact", hj_err, Comparison::Less, p.hj_tolerance);
        cx.check("hamilton-equations", residual, Comparison::Less, p.residual_tolerance);

        cx.finding("hamiltonian", h0);
        cx.finding("separation_total", sep.total());
        cx.finding("verlet_oscillation", oscillation);
        cx.finding("stationary_modes", hj.stationary_modes());
        cx.artifact("energy_series.csv", |w| csvio::write_rows(w, &["t", "H", "H_shadow"], &rows))?;
        let sep_rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i + 1) as f64, sep.energies()[i], beta[i]]).collect();
        cx.artifact("separation.csv", |w| csvio::write_rows(w, &["n", "E_n", "beta_n"], &sep_rows))?;
        cx.artifact("hj_vs_exact.csv", |w| {
            csvio::write_rows(w, &["t", "max_diff", "residual_q", "residual_p"], &hj_rows)
        })
    }
}

// ---------------------------------------------------------------------------

pub(crate) struct StringCompleteness;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct StringCompletenessParams {
    pub modes: usize,
    /// One-based indices of mode energies dropped from the set.
    pub remove: Vec<usize>,
    pub fd_step: f64,
    pub rank_tol: f64,
    /// Momenta of the random state are drawn with `|p| ≥ momentum_floor`.
    pub momentum_floor: f64,
    pub involution_tolerance: f64,
    /// Relative perturbation of the Newton initial guess.
    pub recovery_perturbation: f64,
    pub recovery_tolerance: f64,
}

impl Default for StringCompletenessParams {
    fn default() -> Self {
        Self {
            modes: 8,
            remove: Vec::new(),
            fd_step: 1e-5,
            rank_tol: 1e-8,
            momentum_floor: 0.2,
            involution_tolerance: 1e-6,
            recovery_perturbation: 0.1,
            recovery_tolerance: 1e-8,
        }
    }
}

impl Parameters for StringCompletenessParams {
    fn validate(&self, v: &mut Validator) {
        v.at_least("modes", self.modes, 1);
        for &k in &self.remove {
            v.require("remove", (1..=self.modes).contains(&k), format!("index {k} outside 1..={}", self.modes));
        }
        let mut sorted = self.remove.clone();
        sorted.sort_unstable();
        sorted.dedup();
        v.require("remove", sorted.len() == self.remove.len(), "indices must be distinct");
        v.require("remove", self.remove.len() < self.modes, "cannot remove every mode energy");
        v.positive("fd_step", self.fd_step);
        v.positive("rank_tol", self.rank_tol);
        v.positive("momentum_floor", self.momentum_floor);
        v.require("momentum_floor", self.momentum_floor < 1.0, "must be < 1 (momenta are drawn from ±[floor, 1))");
        v.positive("involution_tolerance", self.involution_tolerance);
        v.non_negative("recovery_perturbation", self.recovery_perturbation);
        v.require("recovery_perturbation", self.recovery_perturbation < 1.0, "must be < 1 to keep the momentum signs");
        v.positive("recovery_tolerance", self.recovery_tolerance);
    }
}

impl Experiment for StringCompleteness {
    const NAME: &'static str = "string-completeness";
    const TOPIC: &'static str = "finite-string";
    type Params = StringCompletenessParams;

    fn available_checks(p: &Self::Params) -> Vec<&'static str> {
        let mut c = vec!["involution", "bracket-oracle", "expects-complete", "expects-incomplete"];
        // recovery needs as many integrals as momenta
        if p.remove.is_empty() {
            c.push("momentum-recovery");
        }
        c
    }

    fn default_checks(p: &Self::Params) -> Vec<&'static str> {
        if p.remove.is_empty() {
            vec!["involution", "bracket-oracle", "expects-complete", "momentum-recovery"]
        } else {
            vec!["involution", "bracket-oracle", "expects-incomplete"]
        }
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let n = p.modes;
        let mut rng = ChaCha8Rng::seed_from_u64(cx.seed());
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let momenta: Vec<f64> = (0..n)
            .map(|_| {
                let m: f64 = rng.random_range(p.momentum_floor..1.0);
                if rng.random_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let s = CanonicalState::new(q.clone(), momenta.clone(), 0.0)?;

        let full = string_observable_set(n)?;
        let removed: Vec<String> = p.remove.iter().map(|k| format!("f{k}")).collect();
        let removed_refs: Vec<&str> = removed.iter().map(String::as_str).collect();
        let obs = full.without(&removed_refs)?;

        let inv = involution_matrix(&obs, &s, p.fd_step)?;
        let max_bracket = max_abs(inv.iter().copied());
        cx.check("involution", max_bracket, Comparison::Less, p.involution_tolerance);

        // central differences against the analytic gradients, including the
        // brackets with every coordinate and momentum: O(h²) agreement
        let mut probes: Vec<Observable> = obs.iter().cloned().collect();
        probes.extend((0..n).map(Observable::coordinate));
        probes.extend((0..n).map(Observable::momentum));
        let mut oracle_err = 0.0f64;
        for f in obs.iter() {
            for g in &probes {
                let fd = poisson_bracket(f, g, &s, p.fd_step)?;
                let exact = analytic_poisson_bracket(f, g, &s).ok_or_else(|| {
                    LabError::Io(format!("internal: no analytic gradient for {} or {}", f.name(), g.name()))
                })?;
                oracle_err = oracle_err.max((fd - exact).abs());
            }
        }
        cx.check("bracket-oracle", oracle_err, Comparison::AtMost, 10.0 * p.fd_step * p.fd_step);

        let report = completeness_report(&completeness_jacobian(&obs, &s, p.fd_step)?, p.rank_tol)?;
        let rank = report.numerical_rank as f64;
        cx.check("expects-complete", rank, Comparison::Equal, n as f64);
        cx.check("expects-incomplete", rank, Comparison::Less, n as f64);
        cx.finding("observables", obs.names());
        cx.finding("complete", report.complete);
        cx.finding("numerical_rank", report.numerical_rank);
        cx.finding("min_singular_value", report.min_singular);
        cx.finding("condition_number", report.condition_number());

        if p.remove.is_empty() {
            let alpha = obs.evaluate(&s)?;
            let guess: Vec<f64> =
                momenta.iter().map(|m| m * (1.0 + p.recovery_perturbation * rng.random_range(-1.0..1.0))).collect();
            let opts = NewtonOptions { fd_step: p.fd_step, rank_tol: p.rank_tol, ..NewtonOptions::default() };
            let rec = recover_momenta(&obs, &alpha, &q, &guess, &opts)?;
            let rel = rec.p.iter().zip(&momenta).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
            cx.check("momentum-recovery", rel, Comparison::Less, p.recovery_tolerance);
            cx.finding("newton_iterations", rec.iterations);
        }

        let state_rows: Vec<Vec<f64>> =
            (0..n).map(|i| vec![(i + 1) as f64, q[i], momenta[i], mode_energy(i + 1, q[i], momenta[i])]).collect();
        cx.artifact("state.csv", |w| csvio::write_rows(w, &["n", "q_n", "p_n", "f_n"], &state_rows))?;
        let inv_rows: Vec<Vec<f64>> = (0..inv.nrows())
            .flat_map(|i| (0..inv.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| vec![(i + 1) as f64, (j + 1) as f64, inv[(i, j)]])
            .collect();
        cx.artifact("involution.csv", |w| csvio::write_rows(w, &["i", "j", "bracket"], &inv_rows))?;
        let sv_rows: Vec<Vec<f64>> =
            report.singular_values.iter().enumerate().map(|(i, s)| vec![(i + 1) as f64, *s]).collect();
        cx.artifact("singular_values.csv", |w| csvio::write_rows(w, &["index", "sigma"], &sv_rows))
    }
}
