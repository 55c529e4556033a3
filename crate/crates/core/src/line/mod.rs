//! The wave equation `u_tt = u_xx` on the line, truncated to `[−L, L]`.
//!
//! Data are compactly supported (below `decay_tol` at both ends), so every
//! integral over the line is a proper integral over the window. Evolution is
//! the d'Alembert solution evaluated spectrally: on the periodic extension
//! `u(x ± t)` is an exact Fourier shift and the velocity integral an exact
//! Fourier antiderivative, which agrees with the line solution as long as the
//! support stays inside the window.

mod moments;
mod remark;

use std::f64::consts::PI;

pub use moments::{
    g_series, g_series_comparison, g_series_from_moments, moments, moments_with_scale, recover_momenta_triangular,
    taylor_oracle, taylor_oracle_from_moments, GSeries, GSeriesComparison, GSeriesRow, MomentCoordinates,
};
pub use remark::{remark2_drift, MomentDriftReport};

use num_complex::Complex64;

use crate::spectral::PeriodicGrid;
use crate::{Error, Result};

pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
pub const DEFAULT_INTERVALS: usize = 1024;
pub const DEFAULT_DECAY_TOL: f64 = 1e-12;

/// `u` and `u_t` on `x_j = (j − M/2)·dx`, `dx = 2L/M`, `j = 0..=M`.
///
/// The grid is exactly symmetric, `x_{M−j} = −x_j`, so odd integrands of
/// symmetric data integrate to exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    half_width: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    t: f64,
    decay_tol: f64,
}

impl LineField {
    pub fn new(half_width: f64, u: Vec<f64>, v: Vec<f64>, t: f64) -> Result<Self> {
        Self::with_decay_tol(half_width, u, v, t, DEFAULT_DECAY_TOL)
    }

    pub fn with_decay_tol(half_width: f64, u: Vec<f64>, v: Vec<f64>, t: f64, decay_tol: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half-width must be positive, got {half_width}")));
        }
        if u.len() != v.len() {
            return Err(Error::Dimension(format!("u has {} samples, v has {}", u.len(), v.len())));
        }
        if u.len() < 5 || (u.len() - 1) % 2 != 0 {
            return Err(Error::Dimension("line grid needs an even number (>= 4) of intervals".into()));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidArgument("field samples must be finite".into()));
        }
        let m = u.len() - 1;
        for (name, w) in [("u", &u), ("v", &v)] {
            if w[0].abs() >= decay_tol || w[m].abs() >= decay_tol {
                return Err(Error::Precondition(format!(
                    "{name} does not decay at the window edges ({:e}, {:e})",
                    w[0], w[m]
                )));
            }
        }
        Ok(Self { half_width, u, v, t, decay_tol })
    }

    pub fn from_fn(
        half_width: f64,
        intervals: usize,
        u: impl Fn(f64) -> f64,
        v: impl Fn(f64) -> f64,
        t: f64,
    ) -> Result<Self> {
        let x = grid(half_width, intervals);
        Self::new(half_width, x.iter().map(|&x| u(x)).collect(), x.iter().map(|&x| v(x)).collect(), t)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn intervals(&self) -> usize {
        self.u.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.intervals() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        grid(self.half_width, self.intervals())
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn decay_tol(&self) -> f64 {
        self.decay_tol
    }

    /// Trapezoid rule for `∫ w(x) g(x_j) dx`, summed in mirrored pairs.
    pub(crate) fn integrate_with(&self, w: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        let m = self.intervals();
        let half = m / 2;
        let x = self.grid();
        let term = |j: usize| w[j] * g(x[j]);
        let mut sum = 0.5 * (term(0) + term(m));
        for j in 1..half {
            sum += term(j) + term(m - j);
        }
        sum += term(half);
        self.spacing() * sum
    }

    /// Largest `|x_j|` where `|u|` or `|v|` reaches `decay_tol`.
    pub fn support_radius(&self) -> f64 {
        self.grid()
            .iter()
            .zip(self.u.iter().zip(&self.v))
            .filter(|(_, (u, v))| u.abs() >= self.decay_tol || v.abs() >= self.decay_tol)
            .map(|(x, _)| x.abs())
            .fold(0.0, f64::max)
    }

    /// Unused buffer between the support and the window edge.
    pub fn margin(&self) -> f64 {
        self.half_width - self.support_radius()
    }

    fn periodic(&self) -> PeriodicGrid {
        PeriodicGrid::new(self.intervals(), 2.0 * self.half_width)
    }

    /// `½ ∫ (u_x² + u_t²) dx`.
    pub fn wave_energy(&self) -> f64 {
        let m = self.intervals();
        let grid = self.periodic();
        let ux = grid.derivative(&self.u[..m], 1);
        let density: Vec<f64> = (0..m).map(|j| ux[j] * ux[j] + self.v[j] * self.v[j]).collect();
        0.5 * grid.integrate(&density)
    }
}

pub fn grid(half_width: f64, intervals: usize) -> Vec<f64> {
    let dx = 2.0 * half_width / intervals as f64;
    let mid = (intervals / 2) as f64;
    (0..=intervals).map(|j| (j as f64 - mid) * dx).collect()
}

/// Advances the field by `dt` with the d'Alembert solution
/// `u(x, t+dt) = ½[u(x+dt) + u(x−dt)] + ½∫_{x−dt}^{x+dt} u_t`.
pub fn dalembert_evolve(f: &LineField, dt: f64) -> Result<LineField> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be finite, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(f.clone());
    }
    let margin = f.margin();
    if dt.abs() >= margin {
        return Err(Error::DomainExit { dt, margin });
    }
    let m = f.intervals();
    let grid = f.periodic();
    let uh = grid.forward(&f.u[..m]);
    let vh = grid.forward(&f.v[..m]);
    let mut uh1 = vec![Complex64::new(0.0, 0.0); m];
    let mut vh1 = vec![Complex64::new(0.0, 0.0); m];
    for (j, &k) in grid.wavenumbers().iter().enumerate() {
        if k == 0.0 {
            uh1[j] = uh[j] + vh[j] * dt;
            vh1[j] = vh[j];
        } else {
            let (s, c) = (k * dt).sin_cos();
            uh1[j] = uh[j] * c + vh[j] * (s / k);
            vh1[j] = -uh[j] * (k * s) + vh[j] * c;
        }
    }
    let mut u = grid.inverse(&uh1);
    let mut v = grid.inverse(&vh1);
    u.push(u[0]);
    v.push(v[0]);
    LineField::with_decay_tol(f.half_width, u, v, f.t + dt, f.decay_tol).map_err(|_| Error::DomainExit { dt, margin })
}

/// `f(y) = ½[(1/2π ∫ u_t sin(xy) dx)² + y² (1/2π ∫ u sin(xy) dx)²]`, the
/// energy carried by the continuous sine mode `y`.
pub fn continuous_mode_energy(f: &LineField, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::InvalidArgument(format!("mode parameter must be finite, got {y}")));
    }
    let c = 1.0 / (2.0 * PI);
    let su = c * f.integrate_with(f.u(), |x| (x * y).sin());
    let sv = c * f.integrate_with(f.v(), |x| (x * y).sin());
    Ok(0.5 * (sv * sv + y * y * su * su))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> f64 {
        (-x * x).exp()
    }

    #[test]
    fn grid_is_symmetric() {
        let x = grid(20.0, 64);
        for j in 0..=64 {
            assert_eq!(x[j], -x[64 - j]);
        }
        assert_eq!(x[0], -20.0);
    }

    #[test]
    fn rejects_non_decaying_data() {
        assert!(matches!(LineField::from_fn(5.0, 64, |_| 1.0, |_| 0.0, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_step_is_identity() {
        let f = LineField::from_fn(20.0, 256, bump, |_| 0.0, 0.0).unwrap();
        assert_eq!(dalembert_evolve(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn bump_splits_into_two_halves() {
        let f = LineField::from_fn(20.0, 1024, bump, |_| 0.0, 0.0).unwrap();
        let dt = 5.0;
        let g = dalembert_evolve(&f, dt).unwrap();
        for (x, u) in g.grid().iter().zip(g.u()) {
            let expect = 0.5 * (bump(x - dt) + bump(x + dt));
            assert!((u - expect).abs() < 1e-13, "x = {x}");
        }
        assert_eq!(g.t(), dt);
    }

    #[test]
    fn velocity_data_spreads_as_plateau() {
        // u_t(x, 0) = bump: u(x, t) = ½ ∫_{x−t}^{x+t} bump = (√π/4)[erf(x+t) − erf(x−t)]
        let f = LineField::from_fn(20.0, 1024, |_| 0.0, bump, 0.0).unwrap();
        let g = dalembert_evolve(&f, 6.0).unwrap();
        let mid = g.intervals() / 2;
        // centre of the plateau: ½ ∫ bump = √π/2
        assert!((g.u()[mid] - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn exceeding_margin_is_domain_exit() {
        let f = LineField::from_fn(10.0, 512, bump, |_| 0.0, 0.0).unwrap();
        let margin = f.margin();
        assert!(margin > 4.0 && margin < 5.0, "{margin}");
        assert!(matches!(dalembert_evolve(&f, margin + 0.1), Err(Error::DomainExit { .. })));
    }

    #[test]
    fn wave_energy_is_conserved() {
        let f = LineField::from_fn(20.0, 1024, |x| x * bump(x - 0.5), |x| (1.0 - x) * bump(x / 1.3), 0.0).unwrap();
        let e0 = f.wave_energy();
        let mut g = f.clone();
        for _ in 0..10 {
            g = dalembert_evolve(&g, 0.8).unwrap();
            assert!((g.wave_energy() - e0).abs() / e0 < 1e-8);
        }
    }

    #[test]
    fn continuous_mode_energy_trivial_values() {
        let zero = LineField::from_fn(20.0, 256, |_| 0.0, |_| 0.0, 0.0).unwrap();
        assert_eq!(continuous_mode_energy(&zero, 1.0).unwrap(), 0.0);
        let f = LineField::from_fn(20.0, 256, |x| x * bump(x), bump, 0.0).unwrap();
        assert_eq!(continuous_mode_energy(&f, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn continuous_mode_energy_of_odd_gaussian() {
        // ∫ x e^{−x²} sin(xy) dx = (√π y/2) e^{−y²/4}
        let f = LineField::from_fn(20.0, 1024, |x| x * bump(x), |_| 0.0, 0.0).unwrap();
        for y in [0.5, 1.0, 2.0] {
            let s = PI.sqrt() * y / 2.0 * (-y * y / 4.0).exp() / (2.0 * PI);
            let expect = 0.5 * y * y * s * s;
            assert!((continuous_mode_energy(&f, y).unwrap() - expect).abs() < 1e-15);
        }
    }
}
