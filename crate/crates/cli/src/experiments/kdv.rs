//! KdV: conserved integrals along the pseudospectral flow, scattering data
//! and the Hamiltonian in action variables.

use integrable_core::csvio::{self, ConservedRow};
use integrable_core::kdv::{
    action_spectrum, bound_states, conserved_integrals, direct_hamiltonian, hamiltonian_from_actions_with,
    riccati_densities, riccati_truncation_residual, scattering_data, schrodinger_a, soliton_field, uniform_k_grid,
    JostOptions, KdvStepper, LinePotential, PeriodicField,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::config::{Parameters, Validator};
use crate::report::{Comparison, RunContext};
use crate::LabError;

/// Shared validation of the periodic soliton set-up.
fn validate_soliton(v: &mut Validator, points: usize, period: f64, kappa: f64, x0: f64) {
    v.power_of_two("points", points, 8);
    v.positive("period", period);
    v.positive("kappa", kappa);
    v.finite("x0", x0);
    if period.is_finite() && period > 0.0 {
        v.require("x0", (0.0..period).contains(&x0), format!("must lie in [0, period = {period})"));
    }
}

/// The step must satisfy the stepper's CFL guard for the soliton amplitude `2κ²`.
fn validate_stepping(v: &mut Validator, p: (usize, f64, f64, f64), steps: usize, stride: usize) {
    let (points, period, dt, kappa) = p;
    v.positive("dt", dt);
    v.at_least("steps", steps, 1);
    v.at_least("stride", stride, 1);
    v.require("stride", stride <= steps, "must not exceed steps");
    if dt.is_finite() && dt > 0.0 && period.is_finite() && period > 0.0 && points >= 8 {
        if let Ok(stepper) = KdvStepper::new(points, period, dt) {
            let amplitude = 2.0 * kappa * kappa;
            v.require(
                "dt",
                amplitude <= stepper.amplitude_limit(),
                format!(
                    "too large for the soliton amplitude 2κ² = {amplitude}: the stability limit at this dt is {}",
                    stepper.amplitude_limit()
                ),
            );
        }
    }
}

fn write_field(cx: &mut RunContext, name: &str, f: &PeriodicField) -> Result<(), LabError> {
    let x = f.grid();
    cx.artifact(name, |w| csvio::write_field(w, "u", &x, f.u()))
}

/// Bound states `k_j = ν − j > 0` of `−D sech²x`, `ν(ν+1) = D`, largest first.
fn sech2_bound_states(depth: f64) -> Vec<f64> {
    let nu = 0.5 * ((1.0 + 4.0 * depth).sqrt() - 1.0);
    (0..).map(|j| nu - j as f64).take_while(|k| *k > 1e-9).collect()
}

// ---------------------------------------------------------------------------

pub(crate) struct KdvConservation;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct KdvConservationParams {
    pub points: usize,
    pub period: f64,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub kappa: f64,
    pub x0: f64,
    /// Number of Riccati densities; at least 5 so that `I_3` is available.
    pub riccati_order: usize,
    /// Truncation order `M` of the Riccati series in the decay-rate test;
    /// the residual should fall like `|k|^{−M}` and `|k|^{−M−2}` at `M + 2`.
    pub truncation_order: usize,
    pub truncation_k: [f64; 2],
    pub drift_tolerance: f64,
    pub even_tolerance: f64,
    pub exponent_tolerance: f64,
}

impl Default for KdvConservationParams {
    fn default() -> Self {
        Self {
            points: 512,
            period: 40.0,
            dt: 1e-4,
            steps: 10_000,
            stride: 500,
            kappa: 1.0,
            x0: 20.0,
            riccati_order: 5,
            truncation_order: 4,
            truncation_k: [20.0, 40.0],
            drift_tolerance: 1e-6,
            even_tolerance: 1e-10,
            exponent_tolerance: 0.1,
        }
    }
}

impl Parameters for KdvConservationParams {
    fn validate(&self, v: &mut Validator) {
        validate_soliton(v, self.points, self.period, self.kappa, self.x0);
        validate_stepping(v, (self.points, self.period, self.dt, self.kappa), self.steps, self.stride);
        v.require("riccati_order", self.riccati_order >= 5, format!("must be >= 5, got {}", self.riccati_order));
        v.require(
            "truncation_order",
            (1..=6).contains(&self.truncation_order),
            format!("must be in 1..=6 (order + 2 stays below the round-off limit), got {}", self.truncation_order),
        );
        let [k1, k2] = self.truncation_k;
        v.require(
            "truncation_k",
            k1.is_finite() && k2.is_finite() && 0.0 < k1 && k1 < k2,
            format!("needs 0 < k1 < k2, got [{k1}, {k2}]"),
        );
        v.positive("drift_tolerance", self.drift_tolerance);
        v.positive("even_tolerance", self.even_tolerance);
        v.positive("exponent_tolerance", self.exponent_tolerance);
    }
}

impl Experiment for KdvConservation {
    const NAME: &'static str = "kdv-conservation";
    const TOPIC: &'static str = "kdv";
    type Params = KdvConservationParams;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec!["I1-drift", "I2-drift", "I3-drift", "even-densities", "riccati-truncation-rate"]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let f0 = soliton_field(p.kappa, p.x0, p.period, p.points)?;
        let stepper = KdvStepper::new(p.points, p.period, p.dt)?;
        let order = p.riccati_order;
        let c0 = conserved_integrals(&riccati_densities(&f0, order)?);
        let row = |f: &PeriodicField, odd: &[f64]| ConservedRow {
            t: f.t(),
            i1: odd[0],
            i2: odd[1],
            i3: odd[2],
            h_direct: direct_hamiltonian(f),
        };
        let mut rows = vec![row(&f0, &c0.odd)];
        let mut drift = [0.0f64; 3];
        let mut even = c0.even.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let f1 = stepper.advance_observed(&f0, p.steps, p.stride, |g| {
            let c = conserved_integrals(&riccati_densities(g, order)?);
            for i in 0..3 {
                drift[i] = drift[i].max((c.odd[i] - c0.odd[i]).abs() / c0.odd[i].abs());
            }
            even = c.even.iter().fold(even, |m, e| m.max(e.abs()));
            rows.push(row(g, &c.odd));
            Ok(())
        })?;
        for (i, name) in ["I1-drift", "I2-drift", "I3-drift"].iter().enumerate() {
            cx.check(name, drift[i], Comparison::Less, p.drift_tolerance);
        }
        cx.check("even-densities", even, Comparison::Less, p.even_tolerance);

        // residual ∝ |k|^{−M}: measured exponents at M and M + 2
        let [k1, k2] = p.truncation_k;
        let mut exponent_rows = Vec::new();
        let mut exponent_err = 0.0f64;
        for m in [p.truncation_order, p.truncation_order + 2] {
            let (r1, r2) = (riccati_truncation_residual(&f0, m, k1)?, riccati_truncation_residual(&f0, m, k2)?);
            let exponent = (r1 / r2).ln() / (k2 / k1).ln();
            exponent_err = exponent_err.max((exponent - m as f64).abs());
            exponent_rows.push(vec![m as f64, r1, r2, exponent]);
        }
        cx.check("riccati-truncation-rate", exponent_err, Comparison::Less, p.exponent_tolerance);

        cx.finding("I_initial", &c0.odd);
        cx.finding("even_initial", &c0.even);
        cx.finding("H_direct", direct_hamiltonian(&f0));
        cx.finding("H_closed_form", -32.0 / 5.0 * p.kappa.powi(5));
        cx.artifact("conserved.csv", |w| csvio::write_conserved_series(w, &rows))?;
        cx.artifact("riccati_truncation.csv", |w| {
            csvio::write_rows(w, &["order", "residual_k1", "residual_k2", "exponent"], &exponent_rows)
        })?;
        write_field(cx, "field_initial.csv", &f0)?;
        write_field(cx, "field_final.csv", &f1)
    }
}

// ---------------------------------------------------------------------------

pub(crate) struct KdvScattering;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct KdvScatteringParams {
    pub points: usize,
    pub period: f64,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub kappa: f64,
    pub x0: f64,
    /// Real wavenumber at which `a(k)` is followed along the flow.
    pub k_probe: f64,
    /// Edge values of the potential window must be below this.
    pub decay_tol: f64,
    /// Sampling of the exported scattering table.
    pub k_max: f64,
    pub k_points: usize,
    /// Depth `D` of the reference well `−D sech²x`.
    pub well_depth: f64,
    pub well_half_width: f64,
    /// Bound states are searched on `(0, bound_k_max]`.
    pub bound_k_max: f64,
    pub drift_tolerance: f64,
    pub bound_tolerance: f64,
}

impl Default for KdvScatteringParams {
    fn default() -> Self {
        Self {
            points: 512,
            period: 40.0,
            dt: 1e-4,
            steps: 10_000,
            stride: 2_500,
            kappa: 1.0,
            x0: 20.0,
            k_probe: 1.3,
            decay_tol: 1e-8,
            k_max: 10.0,
            k_points: 100,
            well_depth: 2.0,
            well_half_width: 20.0,
            bound_k_max: 3.0,
            drift_tolerance: 1e-4,
            bound_tolerance: 1e-8,
        }
    }
}

impl Parameters for KdvScatteringParams {
    fn validate(&self, v: &mut Validator) {
        validate_soliton(v, self.points, self.period, self.kappa, self.x0);
        validate_stepping(v, (self.points, self.period, self.dt, self.kappa), self.steps, self.stride);
        v.positive("k_probe", self.k_probe);
        v.positive("decay_tol", self.decay_tol);
        v.positive("k_max", self.k_max);
        v.at_least("k_points", self.k_points, 1);
        v.positive("well_depth", self.well_depth);
        v.positive("well_half_width", self.well_half_width);
        v.positive("bound_k_max", self.bound_k_max);
        v.require(
            "bound_k_max",
            self.bound_k_max > self.kappa,
            format!("must exceed kappa = {} so the soliton's bound state is in range", self.kappa),
        );
        v.positive("drift_tolerance", self.drift_tolerance);
        v.positive("bound_tolerance", self.bound_tolerance);
    }
}

/// Largest deviation between found and expected bound states; infinite if
/// the counts differ.
fn bound_state_error(found: &[f64], expected: &[f64]) -> f64 {
    if found.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut f = found.to_vec();
    let mut e = expected.to_vec();
    f.sort_by(f64::total_cmp);
    e.sort_by(f64::total_cmp);
    f.iter().zip(&e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

impl Experiment for KdvScattering {
    const NAME: &'static str = "kdv-scattering";
    const TOPIC: &'static str = "kdv";
    type Params = KdvScatteringParams;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec!["a-drift", "soliton-bound-state", "well-bound-states"]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let k = Complex64::new(p.k_probe, 0.0);
        let f0 = soliton_field(p.kappa, p.x0, p.period, p.points)?;
        let stepper = KdvStepper::new(p.points, p.period, p.dt)?;
        let pot0 = LinePotential::from_periodic(&f0, p.decay_tol)?;
        let a0 = schrodinger_a(&pot0, k)?;
        let mut series = vec![vec![f0.t(), a0.re, a0.im]];
        let mut drift = 0.0f64;
        let decay_tol = p.decay_tol;
        stepper.advance_observed(&f0, p.steps, p.stride, |g| {
            let a = schrodinger_a(&LinePotential::from_periodic(g, decay_tol)?, k)?;
            drift = drift.max((a - a0).norm());
            series.push(vec![g.t(), a.re, a.im]);
            Ok(())
        })?;
        cx.check("a-drift", drift, Comparison::Less, p.drift_tolerance);

        let opts = JostOptions::default();
        let s = scattering_data(&pot0, &uniform_k_grid(p.k_max, p.k_points), p.bound_k_max, &opts)?;
        let soliton_err = bound_state_error(&s.bound_k, &[p.kappa]);
        cx.check("soliton-bound-state", soliton_err, Comparison::Less, p.bound_tolerance);

        let depth = p.well_depth;
        let h = p.well_half_width;
        let well = LinePotential::from_fn(-h, h, p.decay_tol, move |x| -depth / x.cosh().powi(2))?;
        let roots = bound_states(&well, p.bound_k_max)?;
        let expected: Vec<f64> = sech2_bound_states(depth).into_iter().filter(|k| *k <= p.bound_k_max).collect();
        cx.check("well-bound-states", bound_state_error(&roots, &expected), Comparison::Less, p.bound_tolerance);

        cx.finding("a_probe_initial", [a0.re, a0.im]);
        cx.finding("soliton_bound_k", &s.bound_k);
        cx.finding("well_bound_k", &roots);
        cx.finding("well_bound_k_expected", &expected);
        cx.finding("unitarity_defect", s.unitarity_defect());
        cx.finding("asymptotic_defect", s.asymptotic_defect());

        let actions = action_spectrum(&s);
        cx.artifact("a_series.csv", |w| csvio::write_rows(w, &["t", "re_a", "im_a"], &series))?;
        cx.artifact("scattering.csv", |w| csvio::write_scattering(w, &s, &actions))?;
        cx.artifact("bound_states.csv", |w| csvio::write_bound_states(w, &s))?;
        let well_rows: Vec<Vec<f64>> = roots.iter().enumerate().map(|(l, k)| vec![(l + 1) as f64, *k, k * k]).collect();
        cx.artifact("well_bound_states.csv", |w| csvio::write_rows(w, &["l", "k_l", "N_l"], &well_rows))
    }
}

// ---------------------------------------------------------------------------

pub(crate) struct KdvActionHamiltonian;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct KdvActionHamiltonianParams {
    pub points: usize,
    pub period: f64,
    pub kappa: f64,
    pub x0: f64,
    pub decay_tol: f64,
    pub k_max: f64,
    pub k_points: usize,
    pub bound_k_max: f64,
    /// Allowed share of the top tenth of the `k` range in the continuous part.
    pub tail_tolerance: f64,
    pub relative_tolerance: f64,
}

impl Default for KdvActionHamiltonianParams {
    fn default() -> Self {
        Self {
            points: 512,
            period: 40.0,
            kappa: 1.0,
            x0: 20.0,
            decay_tol: 1e-8,
            k_max: 10.0,
            k_points: 500,
            bound_k_max: 3.0,
            tail_tolerance: 1e-8,
            relative_tolerance: 1e-4,
        }
    }
}

impl Parameters for KdvActionHamiltonianParams {
    fn validate(&self, v: &mut Validator) {
        validate_soliton(v, self.points, self.period, self.kappa, self.x0);
        v.positive("decay_tol", self.decay_tol);
        v.positive("k_max", self.k_max);
        v.at_least("k_points", self.k_points, 2);
        v.positive("bound_k_max", self.bound_k_max);
        v.require(
            "bound_k_max",
            self.bound_k_max > self.kappa,
            format!("must exceed kappa = {} so the soliton's bound state is in range", self.kappa),
        );
        v.positive("tail_tolerance", self.tail_tolerance);
        v.positive("relative_tolerance", self.relative_tolerance);
    }
}

impl Experiment for KdvActionHamiltonian {
    const NAME: &'static str = "kdv-action-hamiltonian";
    const TOPIC: &'static str = "kdv";
    type Params = KdvActionHamiltonianParams;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec!["actions-vs-closed-form", "direct-vs-closed-form", "actions-vs-direct"]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let target = -32.0 / 5.0 * p.kappa.powi(5);
        let f = soliton_field(p.kappa, p.x0, p.period, p.points)?;
        let pot = LinePotential::from_periodic(&f, p.decay_tol)?;
        let s = scattering_data(&pot, &uniform_k_grid(p.k_max, p.k_points), p.bound_k_max, &JostOptions::default())?;
        let actions = action_spectrum(&s);
        let h = hamiltonian_from_actions_with(&actions, p.tail_tolerance);
        let direct = direct_hamiltonian(&f);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        cx.check("actions-vs-closed-form", rel(h.total, target), Comparison::Less, p.relative_tolerance);
        cx.check("direct-vs-closed-form", rel(direct, target), Comparison::Less, p.relative_tolerance);
        cx.check("actions-vs-direct", rel(h.total, direct), Comparison::Less, p.relative_tolerance);

        cx.finding("H_actions", h.total);
        cx.finding("H_discrete", h.discrete);
        cx.finding("H_continuous", h.continuous);
        cx.finding("H_tail", h.tail);
        cx.finding("H_direct", direct);
        cx.finding("H_closed_form", target);
        cx.finding("bound_k", &s.bound_k);
        cx.finding("bound_n", &actions.bound_n);

        cx.artifact("scattering.csv", |w| csvio::write_scattering(w, &s, &actions))?;
        cx.artifact("bound_states.csv", |w| csvio::write_bound_states(w, &s))?;
        write_field(cx, "field.csv", &f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech2_wells() {
        assert_eq!(sech2_bound_states(2.0), vec![1.0]);
        let six = sech2_bound_states(6.0);
        assert_eq!(six, vec![2.0, 1.0]);
        assert_eq!(sech2_bound_states(0.75), vec![0.5]);
    }

    #[test]
    fn bound_state_error_handles_order_and_count() {
        assert_eq!(bound_state_error(&[1.0, 2.0], &[2.0, 1.0]), 0.0);
        assert!(bound_state_error(&[1.0], &[2.0, 1.0]).is_infinite());
        assert!((bound_state_error(&[1.0 + 1e-9], &[1.0]) - 1e-9).abs() < 1e-15);
    }
}
