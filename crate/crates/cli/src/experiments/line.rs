//! Infinite string: moment coordinates, the g-series and its Taylor oracle,
//! continuous mode energies and the drift of plain velocity moments.

use std::f64::consts::PI;

use integrable_core::csvio;
use integrable_core::line::{
    continuous_mode_energy, dalembert_evolve, g_series_comparison, g_series_from_moments, moments,
    recover_momenta_triangular, remark2_drift, LineField,
};
use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::config::{Parameters, Validator};
use crate::report::{Comparison, RunContext};
use crate::LabError;

fn bump(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Smooth compactly supported data: `u = (x + ½)·b((x − c)/w_u)`,
/// `u_t = (1 − 0.4x + 0.3x²)·b(x/w_v)` with `b` the standard bump.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BumpProfile {
    pub u_center: f64,
    pub u_width: f64,
    pub v_width: f64,
}

impl BumpProfile {
    fn field(&self, half_width: f64, intervals: usize) -> integrable_core::Result<LineField> {
        let BumpProfile { u_center, u_width, v_width } = *self;
        LineField::from_fn(
            half_width,
            intervals,
            move |x| (x + 0.5) * bump((x - u_center) / u_width),
            move |x| (1.0 - 0.4 * x + 0.3 * x * x) * bump(x / v_width),
            0.0,
        )
    }

    fn validate(&self, v: &mut Validator, half_width: f64) {
        v.finite("u_center", self.u_center);
        v.positive("u_width", self.u_width);
        v.positive("v_width", self.v_width);
        v.require(
            "u_width",
            self.u_center.abs() + self.u_width < half_width,
            format!("support of u must lie inside the window (|u_center| + u_width < half_width = {half_width})"),
        );
        v.require(
            "v_width",
            self.v_width < half_width,
            format!("support of u_t must lie inside the window (v_width < half_width = {half_width})"),
        );
    }
}

fn validate_window(v: &mut Validator, half_width: f64, intervals: usize) {
    v.positive("half_width", half_width);
    v.require("intervals", intervals >= 8 && intervals % 2 == 0, format!("must be even and >= 8, got {intervals}"));
}

fn write_field(cx: &mut RunContext, f: &LineField) -> Result<(), LabError> {
    let x = f.grid();
    cx.artifact("field_u.csv", |w| csvio::write_field(w, "u", &x, f.u()))?;
    cx.artifact("field_v.csv", |w| csvio::write_field(w, "u_t", &x, f.v()))
}

// ---------------------------------------------------------------------------

pub(crate) struct LineGSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub(crate) enum SignChoice {
    /// Take the sign of the measured `p_0`.
    Auto,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct LineGSeriesParams {
    pub half_width: f64,
    pub intervals: usize,
    pub u_center: f64,
    pub u_width: f64,
    pub v_width: f64,
    /// Number of momenta recovered from the g-series.
    pub order: usize,
    /// Number of g_k compared against the Taylor oracle.
    pub comparison_order: usize,
    /// Branch of `p_0 = ±√g_1`.
    pub sign_p0: SignChoice,
    pub roundtrip_tolerance: f64,
    pub ratio_spread_tolerance: f64,
}

impl Default for LineGSeriesParams {
    fn default() -> Self {
        Self {
            half_width: 20.0,
            // the bump spectrum decays only like e^{−c√k}; this keeps the
            // window-edge values below the decay tolerance
            intervals: 4096,
            u_center: 0.3,
            u_width: 3.0,
            v_width: 4.0,
            order: 6,
            comparison_order: 5,
            sign_p0: SignChoice::Auto,
            roundtrip_tolerance: 1e-8,
            ratio_spread_tolerance: 1e-9,
        }
    }
}

impl LineGSeriesParams {
    fn profile(&self) -> BumpProfile {
        BumpProfile { u_center: self.u_center, u_width: self.u_width, v_width: self.v_width }
    }
}

impl Parameters for LineGSeriesParams {
    fn validate(&self, v: &mut Validator) {
        validate_window(v, self.half_width, self.intervals);
        self.profile().validate(v, self.half_width);
        v.require("order", (1..=10).contains(&self.order), format!("must be in 1..=10, got {}", self.order));
        v.require(
            "comparison_order",
            (1..=10).contains(&self.comparison_order),
            format!("must be in 1..=10, got {}", self.comparison_order),
        );
        v.positive("roundtrip_tolerance", self.roundtrip_tolerance);
        v.positive("ratio_spread_tolerance", self.ratio_spread_tolerance);
    }
}

impl Experiment for LineGSeries {
    const NAME: &'static str = "line-gseries";
    const TOPIC: &'static str = "infinite-string";
    type Params = LineGSeriesParams;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec!["roundtrip", "oracle-ratio-constant"]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let f = p.profile().field(p.half_width, p.intervals)?;
        let m = moments(&f, p.order)?;
        let g = g_series_from_moments(&m, p.order)?;
        let sign = match p.sign_p0 {
            SignChoice::Auto => {
                if m.p[0] < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            SignChoice::Plus => 1.0,
            SignChoice::Minus => -1.0,
        };
        let recovered = recover_momenta_triangular(&g, &m.q, sign)?;
        let rel = recovered.iter().zip(&m.p).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
        cx.check("roundtrip", rel, Comparison::Less, p.roundtrip_tolerance);

        let cmp = g_series_comparison(&f, p.comparison_order)?;
        cx.check("oracle-ratio-constant", cmp.ratio_spread(), Comparison::Less, p.ratio_spread_tolerance);
        cx.finding("mean_ratio", cmp.mean_ratio());
        cx.finding("eight_pi_squared", 8.0 * PI * PI);
        cx.finding("moment_scale", m.scale);
        cx.finding("p0", m.physical_p()[0]);
        cx.finding("sign_p0", sign);

        cx.artifact("gseries_comparison.csv", |w| csvio::write_gseries_comparison(w, &cmp))?;
        let (q, p_true, p_rec, gk) = (m.physical_q(), m.physical_p(), m.to_physical_p(&recovered), g.physical());
        let rows: Vec<Vec<f64>> = (0..p.order).map(|n| vec![n as f64, q[n], p_true[n], p_rec[n], gk[n]]).collect();
        cx.artifact("moments.csv", |w| csvio::write_rows(w, &["n", "q_n", "p_n", "p_recovered_n", "g_n"], &rows))?;
        write_field(cx, &f)
    }
}

// ---------------------------------------------------------------------------

pub(crate) struct LineRemark2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct LineRemark2Params {
    pub half_width: f64,
    pub intervals: usize,
    pub u_center: f64,
    pub u_width: f64,
    pub v_width: f64,
    /// Mode parameters `y` of the continuous mode energies.
    pub ys: Vec<f64>,
    /// Evolution times at which the mode energies are compared.
    pub times: Vec<f64>,
    /// Moments `∫xⁿ u_t` are followed for `n = 0..=max_order`.
    pub max_order: u32,
    pub horizon: f64,
    pub samples: usize,
    pub mode_energy_tolerance: f64,
    pub conservation_tolerance: f64,
    pub prediction_tolerance: f64,
}

impl Default for LineRemark2Params {
    fn default() -> Self {
        let g = LineGSeriesParams::default();
        Self {
            half_width: g.half_width,
            intervals: g.intervals,
            u_center: g.u_center,
            u_width: g.u_width,
            v_width: g.v_width,
            ys: vec![0.5, 1.0, 2.0],
            times: vec![0.5, 2.0, 7.5, 12.0],
            max_order: 3,
            horizon: 10.0,
            samples: 20,
            mode_energy_tolerance: 1e-8,
            conservation_tolerance: 1e-10,
            prediction_tolerance: 1e-8,
        }
    }
}

impl LineRemark2Params {
    fn profile(&self) -> BumpProfile {
        BumpProfile { u_center: self.u_center, u_width: self.u_width, v_width: self.v_width }
    }
}

impl Parameters for LineRemark2Params {
    fn validate(&self, v: &mut Validator) {
        validate_window(v, self.half_width, self.intervals);
        self.profile().validate(v, self.half_width);
        v.require("ys", !self.ys.is_empty(), "must list at least one mode parameter");
        v.require("ys", self.ys.iter().all(|y| y.is_finite() && *y > 0.0), "mode parameters must be finite and > 0");
        v.require("times", !self.times.is_empty(), "must list at least one time");
        v.require("times", self.times.iter().all(|t| t.is_finite()), "times must be finite");
        v.require("max_order", self.max_order >= 1, "must be >= 1 so that n = 0 and n = 1 are both followed");
        v.require("max_order", self.max_order <= 10, format!("must be <= 10, got {}", self.max_order));
        v.positive("horizon", self.horizon);
        v.at_least("samples", self.samples, 1);
        v.positive("mode_energy_tolerance", self.mode_energy_tolerance);
        v.positive("conservation_tolerance", self.conservation_tolerance);
        v.positive("prediction_tolerance", self.prediction_tolerance);
    }
}

impl Experiment for LineRemark2 {
    const NAME: &'static str = "line-remark2";
    const TOPIC: &'static str = "infinite-string";
    type Params = LineRemark2Params;

    fn available_checks(_: &Self::Params) -> Vec<&'static str> {
        vec!["mode-energy-drift", "low-moments-conserved", "drift-matches-prediction"]
    }

    fn run(p: &Self::Params, cx: &mut RunContext) -> Result<(), LabError> {
        let f = p.profile().field(p.half_width, p.intervals)?;

        let mut energy_rows = Vec::new();
        let mut drift = 0.0f64;
        for &y in &p.ys {
            let f0 = continuous_mode_energy(&f, y)?;
            energy_rows.push(vec![y, 0.0, f0, 0.0]);
            for &t in &p.times {
                let e = continuous_mode_energy(&dalembert_evolve(&f, t)?, y)?;
                let rel = (e - f0).abs() / f0;
                drift = drift.max(rel);
                energy_rows.push(vec![y, t, e, rel]);
            }
        }
        cx.check("mode-energy-drift", drift, Comparison::Less, p.mode_energy_tolerance);

        let mut moment_rows = Vec::new();
        let mut low = 0.0f64;
        let mut mismatch = 0.0f64;
        let mut measured = serde_json::Map::new();
        for n in 0..=p.max_order {
            let r = remark2_drift(&f, n, p.horizon, p.samples, p.conservation_tolerance)?;
            if n <= 1 {
                low = low.max(r.max_drift);
            }
            // d/dt ∫xⁿu_t = n(n−1)∫x^{n−2}u gives the drift in closed form
            let scale = r.predicted_final_drift.abs().max(1.0);
            mismatch = mismatch.max((r.final_drift - r.predicted_final_drift).abs() / scale);
            measured.insert(format!("n{n}_final_drift"), r.final_drift.into());
            moment_rows.push(vec![
                n as f64,
                r.initial,
                r.max_drift,
                r.final_drift,
                r.predicted_final_drift,
                if r.conserved { 1.0 } else { 0.0 },
            ]);
        }
        cx.check("low-moments-conserved", low, Comparison::Less, p.conservation_tolerance);
        cx.check("drift-matches-prediction", mismatch, Comparison::Less, p.prediction_tolerance);
        cx.finding("moment_drifts", measured);
        cx.finding("support_margin", f.margin());

        cx.artifact("mode_energy.csv", |w| csvio::write_rows(w, &["y", "t", "f_y", "rel_drift"], &energy_rows))?;
        cx.artifact("moment_drift.csv", |w| {
            csvio::write_rows(
                w,
                &["n", "initial", "max_drift", "final_drift", "predicted_final_drift", "conserved"],
                &moment_rows,
            )
        })?;
        write_field(cx, &f)
    }
}
