//! Odd moments of the line field and the `y`-series of the continuous mode energy.
//!
//! With `q_n = ∫ x^{2n+1} u dx` and `p_n = ∫ x^{2n+1} u_t dx`, the integrals
//! `g_1 = p_0²` and, for `k ≥ 2`,
//!
//! ```text
//! g_k = (−1)^{k+1}/(2k−1)! · p_0 p_{k−1}
//!     + Σ_{m=0}^{k−2} (−1)^k / ((2m+1)! (2k−2m−3)!)
//!         · [ q_{k−m−2} q_m − p_{k−m−1} p_m / ((2k−2m−2)(2k−2m−1)) ]
//! ```
//!
//! are conserved. `p_{k−1}` enters `g_k` linearly with coefficient
//! `2(−1)^{k+1} p_0 / (2k−1)!` and only lower momenta otherwise, so the momenta
//! are recovered one at a time once the sign of `p_0` is chosen.
//!
//! [`taylor_oracle`] expands `sin(xy)` inside the continuous mode energy and
//! collects powers of `y` directly; it shares nothing with the closed form
//! above beyond the moments themselves. The comparison of the two is data:
//! [`g_series_comparison`] reports the per-`k` ratio rather than assuming one.
//!
//! Moments are taken in units where `x` is divided by `scale` (the window
//! half-width by default) and time with it, so the velocity moments pick up
//! one extra power of `scale`. In those units `q_n` and `p_n` are
//! `scale^{−(2n+2)}` and `scale^{−(2n+1)}` times their physical values and
//! every `g_k` is `scale^{−2k}` times its physical value.

use std::f64::consts::PI;

use super::LineField;
use crate::{Error, Result};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Odd moments in units of `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCoordinates {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub scale: f64,
}

impl MomentCoordinates {
    pub fn order(&self) -> usize {
        self.q.len()
    }

    /// `q_n` in the field's own units.
    pub fn physical_q(&self) -> Vec<f64> {
        self.q.iter().enumerate().map(|(n, q)| q * self.scale.powi(2 * n as i32 + 2)).collect()
    }

    /// `p_n` in the field's own units.
    pub fn physical_p(&self) -> Vec<f64> {
        to_physical_p(&self.p, self.scale)
    }

    pub fn to_physical_p(&self, p: &[f64]) -> Vec<f64> {
        to_physical_p(p, self.scale)
    }
}

fn to_physical_p(p: &[f64], scale: f64) -> Vec<f64> {
    p.iter().enumerate().map(|(n, p)| p * scale.powi(2 * n as i32 + 1)).collect()
}

pub fn moments(f: &LineField, order: usize) -> Result<MomentCoordinates> {
    moments_with_scale(f, order, f.half_width())
}

pub fn moments_with_scale(f: &LineField, order: usize, scale: f64) -> Result<MomentCoordinates> {
    if order == 0 {
        return Err(Error::InvalidArgument("moment order must be >= 1".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("moment scale must be positive, got {scale}")));
    }
    let mut q = Vec::with_capacity(order);
    let mut p = Vec::with_capacity(order);
    for n in 0..order {
        let power = 2 * n as i32 + 1;
        let weight = |x: f64| (x / scale).powi(power);
        // dx' = dx/scale; u_t' = scale·u_t
        let qn = f.integrate_with(f.u(), weight) / scale;
        let pn = f.integrate_with(f.v(), weight);
        if !(qn.is_finite() && pn.is_finite()) {
            return Err(Error::Scaling(format!("moment of order {} is not finite at scale {scale}", power)));
        }
        q.push(qn);
        p.push(pn);
    }
    Ok(MomentCoordinates { q, p, scale })
}

/// `g_1..g_K` in moment units.
#[derive(Debug, Clone, PartialEq)]
pub struct GSeries {
    pub g: Vec<f64>,
    pub scale: f64,
}

impl GSeries {
    pub fn order(&self) -> usize {
        self.g.len()
    }

    /// `g_k` in the field's own units.
    pub fn physical(&self) -> Vec<f64> {
        self.g.iter().enumerate().map(|(i, g)| g * self.scale.powi(2 * (i as i32 + 1))).collect()
    }
}

/// `(−1)^k / ((2m+1)! (2k−2m−3)!)`.
fn pair_coefficient(k: usize, m: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign / (factorial(2 * m + 1) * factorial(2 * (k - m) - 3))
}

/// `1 / ((2k−2m−2)(2k−2m−1))`.
fn momentum_damping(k: usize, m: usize) -> f64 {
    let r = 2 * (k - m);
    1.0 / (((r - 2) * (r - 1)) as f64)
}

fn lead_coefficient(k: usize) -> f64 {
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    sign / factorial(2 * k - 1)
}

pub fn g_series_from_moments(m: &MomentCoordinates, order: usize) -> Result<GSeries> {
    if order == 0 {
        return Err(Error::InvalidArgument("series order must be >= 1".into()));
    }
    if m.order() < order {
        return Err(Error::Dimension(format!("{} moments for a series of order {order}", m.order())));
    }
    let (q, p) = (&m.q, &m.p);
    let mut g = vec![p[0] * p[0]];
    for k in 2..=order {
        let mut gk = lead_coefficient(k) * p[0] * p[k - 1];
        for j in 0..=k - 2 {
            gk += pair_coefficient(k, j) * (q[k - j - 2] * q[j] - momentum_damping(k, j) * p[k - j - 1] * p[j]);
        }
        g.push(gk);
    }
    Ok(GSeries { g, scale: m.scale })
}

pub fn g_series(f: &LineField, order: usize) -> Result<GSeries> {
    g_series_from_moments(&moments(f, order)?, order)
}

/// Coefficients `c_k` of `y^{2k}`, `k = 1..=K`, in the power series of the
/// continuous mode energy, in the field's own units.
pub fn taylor_oracle_from_moments(m: &MomentCoordinates, order: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::InvalidArgument("series order must be >= 1".into()));
    }
    if m.order() < order {
        return Err(Error::Dimension(format!("{} moments for a series of order {order}", m.order())));
    }
    // ∫ w sin(xy) dx = Σ_j s_j y^{2j+1},  s_j = (−1)^j μ_j / (2j+1)!
    let sine_series = |mu: &[f64]| -> Vec<f64> {
        mu.iter()
            .enumerate()
            .map(|(j, m)| if j % 2 == 0 { 1.0 } else { -1.0 } * m / factorial(2 * j + 1))
            .collect::<Vec<_>>()
    };
    let sv = sine_series(&m.p);
    let su = sine_series(&m.q);
    let norm = 0.5 / (4.0 * PI * PI);
    let coefficients = (1..=order)
        .map(|k| {
            // (Σ s_j y^{2j+1})² contributes y^{2(a+b+1)}; the u part carries an extra y².
            let from_v: f64 = (0..k).map(|a| sv[a] * sv[k - 1 - a]).sum();
            let from_u: f64 = if k >= 2 { (0..k - 1).map(|a| su[a] * su[k - 2 - a]).sum() } else { 0.0 };
            norm * (from_v + from_u) * m.scale.powi(2 * k as i32)
        })
        .collect();
    Ok(coefficients)
}

pub fn taylor_oracle(f: &LineField, order: usize) -> Result<Vec<f64>> {
    taylor_oracle_from_moments(&moments(f, order)?, order)
}

/// Recovers `p_0..p_{K−1}` from `g_1..g_K` and `q_0..q_{K−2}`, all in the same
/// (moment) units. `sign_p0` picks the branch of `p_0 = ±√g_1`.
///
/// When `p_0 = 0` the higher momenta are undetermined; the only consistent
/// data are then those whose remaining right-hand sides vanish, which yield
/// zero momenta. Anything else is a singular-point error.
pub fn recover_momenta_triangular(g: &GSeries, q: &[f64], sign_p0: f64) -> Result<Vec<f64>> {
    let order = g.order();
    if order == 0 {
        return Err(Error::InvalidArgument("empty g-series".into()));
    }
    if sign_p0 != 1.0 && sign_p0 != -1.0 {
        return Err(Error::InvalidArgument(format!("sign of p_0 must be ±1, got {sign_p0}")));
    }
    if q.len() + 1 < order {
        return Err(Error::Dimension(format!("{} coordinates for a series of order {order}", q.len())));
    }
    let g1 = g.g[0];
    if !(g1 >= 0.0) {
        return Err(Error::InvalidIntegrals(format!("g_1 = {g1} must be a nonnegative square")));
    }
    let mut p = vec![sign_p0 * g1.sqrt()];
    for k in 2..=order {
        let mut rest = 0.0;
        for j in 0..=k - 2 {
            rest += pair_coefficient(k, j) * q[k - j - 2] * q[j];
            if j >= 1 {
                rest -= pair_coefficient(k, j) * momentum_damping(k, j) * p[k - j - 1] * p[j];
            }
        }
        let rhs = g.g[k - 1] - rest;
        let slope = 2.0 * lead_coefficient(k) * p[0];
        if slope == 0.0 {
            if rhs == 0.0 {
                p.push(0.0);
                continue;
            }
            return Err(Error::SingularPoint(format!("p_0 = 0 leaves p_{} undetermined (residual {rhs:e})", k - 1)));
        }
        p.push(rhs / slope);
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GSeriesRow {
    pub k: usize,
    pub g_paper: f64,
    pub g_oracle: f64,
    pub ratio: f64,
    pub abs_diff: f64,
}

/// Closed-form `g_k` next to the Taylor coefficients, both in physical units.
#[derive(Debug, Clone)]
pub struct GSeriesComparison {
    pub rows: Vec<GSeriesRow>,
}

impl GSeriesComparison {
    /// Mean of the finite per-`k` ratios.
    pub fn mean_ratio(&self) -> f64 {
        let finite: Vec<f64> = self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len() as f64
    }

    /// `(max − min) / |mean|` over the finite ratios; zero when the two
    /// constructions differ by a single constant factor.
    pub fn ratio_spread(&self) -> f64 {
        let finite: Vec<f64> = self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).collect();
        if finite.is_empty() {
            return f64::NAN;
        }
        let max = finite.iter().copied().fold(f64::MIN, f64::max);
        let min = finite.iter().copied().fold(f64::MAX, f64::min);
        (max - min) / self.mean_ratio().abs()
    }
}

pub fn g_series_comparison(f: &LineField, order: usize) -> Result<GSeriesComparison> {
    let m = moments(f, order)?;
    let paper = g_series_from_moments(&m, order)?.physical();
    let oracle = taylor_oracle_from_moments(&m, order)?;
    let rows = paper
        .iter()
        .zip(&oracle)
        .enumerate()
        .map(|(i, (&g_paper, &g_oracle))| GSeriesRow {
            k: i + 1,
            g_paper,
            g_oracle,
            ratio: g_paper / g_oracle,
            abs_diff: (g_paper - g_oracle).abs(),
        })
        .collect();
    Ok(GSeriesComparison { rows })
}
