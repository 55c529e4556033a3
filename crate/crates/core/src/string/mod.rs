//! The vibrating string `u_tt = u_xx` on `[0, 2π]` with `u(0) = u(2π) = 0`.
//!
//! Fields are expanded as `u = Σ a_n sin(nx)`, and the mode pairs
//! `(q_n, p_n) = (a_n, a'_n)` are canonical for `H = ½ Σ (p_n² + n² q_n²)`.
//! Each mode energy `f_n = ½(p_n² + n² q_n²)` is a first integral.
//!
//! Two normalizations coexist. The energy written with raw sine integrals,
//! `½ n² (∫u sin nx)² + ½ (∫u_t sin nx)²` ([`field_energy_integral`]), equals
//! `π² f_n` because `∫₀^{2π} sin²(nx) dx = π`; the field Hamiltonian
//! `½ ∫ (u_t² + u_x²)` ([`StringField::hamiltonian`]) equals `π` times the mode
//! Hamiltonian.
//!
//! Differentiating `f_n` gives `∂f_n/∂q_m = n² q_n δ_nm` and
//! `∂f_n/∂p_m = p_n δ_nm`, not a bare Kronecker delta. Completeness is
//! therefore decided on the momentum block `diag(p_n)`: it holds wherever all
//! `p_n ≠ 0` and fails with any single `f_k` removed.

mod hj;

use std::f64::consts::PI;

pub use hj::{
    hamilton_residual, hj_action, hj_action_slope, hj_trajectory, HamiltonResidual, HjTrajectory, SeparationData,
};

use crate::canonical::{CanonicalState, HamiltonianSystem, Observable, ObservableSet};
use crate::spectral::PeriodicGrid;
use crate::{Error, Result};

/// Default number of grid intervals on `[0, 2π]`.
pub const DEFAULT_INTERVALS: usize = 256;

/// Largest boundary value accepted (and snapped to zero) relative to the field scale.
const BOUNDARY_TOL: f64 = 1e-12;

/// Displacement and velocity sampled at `x_j = 2πj/M`, `j = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct StringField {
    u: Vec<f64>,
    v: Vec<f64>,
    t: f64,
}

impl StringField {
    pub fn new(mut u: Vec<f64>, mut v: Vec<f64>, t: f64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Dimension(format!("u has {} samples, v has {}", u.len(), v.len())));
        }
        if u.len() < 3 {
            return Err(Error::Dimension("string grid needs at least 2 intervals".into()));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidArgument("field samples must be finite".into()));
        }
        let m = u.len() - 1;
        for (name, w) in [("u", &mut u), ("v", &mut v)] {
            let scale = w.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            if w[0].abs() > BOUNDARY_TOL * scale || w[m].abs() > BOUNDARY_TOL * scale {
                return Err(Error::InvalidArgument(format!(
                    "{name} violates the Dirichlet condition ({}, {})",
                    w[0], w[m]
                )));
            }
            w[0] = 0.0;
            w[m] = 0.0;
        }
        Ok(Self { u, v, t })
    }

    /// Samples `u(x)` and `v(x)` on `intervals + 1` points.
    pub fn from_fn(intervals: usize, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64, t: f64) -> Result<Self> {
        let x = grid(intervals);
        Self::new(x.iter().map(|&x| u(x)).collect(), x.iter().map(|&x| v(x)).collect(), t)
    }

    /// Synthesizes `Σ a_n sin(nx)` and `Σ a'_n sin(nx)`.
    pub fn from_modes(modes: &ModeState, intervals: usize) -> Result<Self> {
        let synth =
            |c: &[f64], x: f64| -> f64 { c.iter().enumerate().map(|(i, c)| c * ((i + 1) as f64 * x).sin()).sum() };
        Self::from_fn(intervals, |x| synth(modes.a(), x), |x| synth(modes.adot(), x), modes.t())
    }

    pub fn intervals(&self) -> usize {
        self.u.len() - 1
    }

    pub fn grid(&self) -> Vec<f64> {
        grid(self.intervals())
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

    fn spacing(&self) -> f64 {
        2.0 * PI / self.intervals() as f64
    }

    /// Trapezoid rule for `∫₀^{2π} w(x) sin(nx) dx`; endpoint terms vanish.
    fn sine_integral(&self, w: &[f64], n: usize) -> f64 {
        let h = self.spacing();
        let nf = n as f64;
        h * (1..self.intervals()).map(|j| w[j] * (nf * j as f64 * h).sin()).sum::<f64>()
    }

    /// `½ ∫₀^{2π} (u_t² + u_x²) dx`, with `u_x` from a periodic spectral derivative.
    pub fn hamiltonian(&self) -> f64 {
        let m = self.intervals();
        let grid = PeriodicGrid::new(m, 2.0 * PI);
        let ux = grid.derivative(&self.u[..m], 1);
        let density: Vec<f64> = (0..m).map(|j| self.v[j].powi(2) + ux[j].powi(2)).collect();
        0.5 * grid.integrate(&density)
    }

    fn check_resolved(&self, n: usize) -> Result<()> {
        if n == 0 || 2 * n >= self.intervals() {
            return Err(Error::Resolution { modes: n, intervals: self.intervals() });
        }
        Ok(())
    }
}

pub fn grid(intervals: usize) -> Vec<f64> {
    let h = 2.0 * PI / intervals as f64;
    (0..=intervals).map(|j| j as f64 * h).collect()
}

/// Mode amplitudes `a_n(t)` and velocities `a'_n(t)` for `n = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    a: Vec<f64>,
    adot: Vec<f64>,
    t: f64,
}

impl ModeState {
    pub fn new(a: Vec<f64>, adot: Vec<f64>, t: f64) -> Result<Self> {
        if a.len() != adot.len() || a.is_empty() {
            return Err(Error::Dimension(format!("{} amplitudes, {} velocities", a.len(), adot.len())));
        }
        if a.iter().chain(&adot).any(|x| !x.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidArgument("mode state must be finite".into()));
        }
        Ok(Self { a, adot, t })
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn adot(&self) -> &[f64] {
        &self.adot
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn energies(&self) -> Vec<f64> {
        (1..=self.modes()).map(|n| mode_energy(n, self.a[n - 1], self.adot[n - 1])).collect()
    }

    /// `H = ½ Σ (a'_n² + n² a_n²)`.
    pub fn hamiltonian(&self) -> f64 {
        self.energies().iter().sum()
    }

    pub fn to_canonical(&self) -> CanonicalState {
        CanonicalState::new(self.a.clone(), self.adot.clone(), self.t).expect("mode state is valid")
    }

    pub fn from_canonical(s: &CanonicalState) -> Self {
        Self { a: s.q().to_vec(), adot: s.p().to_vec(), t: s.t() }
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        self.a
            .iter()
            .zip(&other.a)
            .chain(self.adot.iter().zip(&other.adot))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Sine coefficients `a_n = (1/π) ∫ u sin(nx) dx` (and `a'_n` from `u_t`)
/// for `n = 1..=modes`, by the trapezoid rule. The rule is exact for fields
/// band-limited below `M/2`, which is why `M > 2·modes` is required.
pub fn sine_modes(field: &StringField, modes: usize) -> Result<ModeState> {
    field.check_resolved(modes)?;
    let a = (1..=modes).map(|n| field.sine_integral(field.u(), n) / PI).collect();
    let adot = (1..=modes).map(|n| field.sine_integral(field.v(), n) / PI).collect();
    ModeState::new(a, adot, field.t())
}

/// `f_n = ½(a'_n² + n² a_n²)`.
pub fn mode_energy(n: usize, a: f64, adot: f64) -> f64 {
    let nf = n as f64;
    0.5 * (adot * adot + nf * nf * a * a)
}

/// `½ n² (∫u sin nx dx)² + ½ (∫u_t sin nx dx)²`, which is `π²` times [`mode_energy`].
pub fn field_energy_integral(field: &StringField, n: usize) -> Result<f64> {
    field.check_resolved(n)?;
    let su = field.sine_integral(field.u(), n);
    let sv = field.sine_integral(field.v(), n);
    let nf = n as f64;
    Ok(0.5 * nf * nf * su * su + 0.5 * sv * sv)
}

/// Closed-form flow of the mode equations `a''_n = −n² a_n` from `m.t` to `t1`.
pub fn exact_mode_evolution(m: &ModeState, t1: f64) -> ModeState {
    let dt = t1 - m.t;
    let (a, adot) =
        m.a.iter()
            .zip(&m.adot)
            .enumerate()
            .map(|(i, (&a, &adot))| {
                let n = (i + 1) as f64;
                let (s, c) = (n * dt).sin_cos();
                (a * c + adot / n * s, -n * a * s + adot * c)
            })
            .unzip();
    ModeState { a, adot, t: t1 }
}

/// `H = ½ Σ (p_n² + n² q_n²)` with analytic gradients, marked separable.
pub fn string_hamiltonian_system(modes: usize) -> Result<HamiltonianSystem> {
    let sys = HamiltonianSystem::new(modes, |s: &CanonicalState| {
        s.q().iter().zip(s.p()).enumerate().map(|(i, (&q, &p))| mode_energy(i + 1, q, p)).sum()
    })?;
    Ok(sys
        .with_gradients(
            |s: &CanonicalState| s.q().iter().enumerate().map(|(i, q)| ((i + 1) * (i + 1)) as f64 * q).collect(),
            |s: &CanonicalState| s.p().to_vec(),
        )
        .separable())
}

/// The mode energies `f1..fN` as observables over `(q, p) = (a, a')`.
pub fn string_observable_set(modes: usize) -> Result<ObservableSet> {
    if modes == 0 {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    let obs = (1..=modes)
        .map(|n| {
            let k = n - 1;
            Observable::new(format!("f{n}"), move |s: &CanonicalState| mode_energy(n, s.q()[k], s.p()[k]))
                .with_gradient(move |s: &CanonicalState| {
                    let mut gq = vec![0.0; s.dim()];
                    let mut gp = vec![0.0; s.dim()];
                    gq[k] = (n * n) as f64 * s.q()[k];
                    gp[k] = s.p()[k];
                    (gq, gp)
                })
        })
        .collect();
    ObservableSet::new(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{completeness_jacobian, completeness_report, DEFAULT_FD_STEP, DEFAULT_RANK_TOL};
    use proptest::prelude::*;

    #[test]
    fn sine_modes_of_single_sine() {
        let f = StringField::from_fn(64, f64::sin, |_| 0.0, 0.0).unwrap();
        let m = sine_modes(&f, 8).unwrap();
        assert!((m.a()[0] - 1.0).abs() < 1e-14);
        assert!(m.a()[1..].iter().all(|a| a.abs() < 1e-14));
        assert!(m.adot().iter().all(|a| a.abs() < 1e-14));
    }

    #[test]
    fn sine_modes_of_zero_and_mixed_fields() {
        let zero = StringField::from_fn(64, |_| 0.0, |_| 0.0, 0.0).unwrap();
        assert!(sine_modes(&zero, 8).unwrap().a().iter().all(|&a| a == 0.0));

        let f = StringField::from_fn(64, |x| (3.0 * x).sin() - 2.0 * (5.0 * x).sin(), |_| 0.0, 0.0).unwrap();
        let m = sine_modes(&f, 10).unwrap();
        for (i, a) in m.a().iter().enumerate() {
            let expect = match i + 1 {
                3 => 1.0,
                5 => -2.0,
                _ => 0.0,
            };
            assert!((a - expect).abs() < 1e-12, "a_{} = {a}", i + 1);
        }
    }

    #[test]
    fn resolution_guard() {
        let f = StringField::from_fn(16, f64::sin, |_| 0.0, 0.0).unwrap();
        assert!(sine_modes(&f, 7).is_ok());
        assert!(matches!(sine_modes(&f, 8), Err(Error::Resolution { modes: 8, intervals: 16 })));
        assert!(sine_modes(&f, 0).is_err());
    }

    #[test]
    fn dirichlet_condition_is_enforced() {
        assert!(StringField::from_fn(32, f64::cos, |_| 0.0, 0.0).is_err());
        let f = StringField::from_fn(32, f64::sin, |_| 0.0, 0.0).unwrap();
        assert_eq!(f.u()[32], 0.0);
    }

    #[test]
    fn mode_energy_values() {
        assert_eq!(mode_energy(2, 1.0, 0.0), 2.0);
        assert_eq!(mode_energy(1, 0.0, 3.0), 4.5);
    }

    #[test]
    fn field_energy_integral_carries_pi_squared() {
        let f = StringField::from_fn(128, f64::sin, |_| 0.0, 0.0).unwrap();
        assert!((field_energy_integral(&f, 1).unwrap() - 0.5 * PI * PI).abs() < 1e-12);
        let zero = StringField::from_fn(128, |_| 0.0, |_| 0.0, 0.0).unwrap();
        assert_eq!(field_energy_integral(&zero, 3).unwrap(), 0.0);
    }

    #[test]
    fn exact_evolution_special_times() {
        let m = ModeState::new(vec![1.0], vec![0.0], 0.0).unwrap();
        assert_eq!(exact_mode_evolution(&m, 0.0), m);
        let quarter = exact_mode_evolution(&m, PI / 2.0);
        assert!(quarter.a()[0].abs() < 1e-15 && (quarter.adot()[0] + 1.0).abs() < 1e-15);

        let m = ModeState::new(vec![0.3, -1.0, 0.2], vec![1.5, 0.1, -0.7], 0.5).unwrap();
        let back = exact_mode_evolution(&m, 0.5 + 2.0 * PI);
        assert!(back.max_difference(&m) < 1e-13);
    }

    #[test]
    fn parseval_between_field_and_modes() {
        let m = ModeState::new(vec![0.4, -0.2, 0.0, 0.1], vec![0.0, 0.3, -0.5, 0.05], 0.0).unwrap();
        let f = StringField::from_modes(&m, 64).unwrap();
        assert!((f.hamiltonian() - PI * m.hamiltonian()).abs() < 1e-12);
    }

    #[test]
    fn jacobian_of_energies_is_diag_p() {
        let n = 4;
        let s = CanonicalState::new(vec![0.3, -0.1, 0.7, 0.2], vec![0.5, -1.0, 2.0, 0.25], 0.0).unwrap();
        let obs = string_observable_set(n).unwrap();
        let j = completeness_jacobian(&obs, &s, DEFAULT_FD_STEP).unwrap();
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c { s.p()[r] } else { 0.0 };
                assert!((j[(r, c)] - expect).abs() < 1e-10);
            }
        }
        let reduced = obs.without(&["f1"]).unwrap();
        let j = completeness_jacobian(&reduced, &s, DEFAULT_FD_STEP).unwrap();
        assert!(j.column(0).iter().all(|&x| x == 0.0));
        let report = completeness_report(&j, DEFAULT_RANK_TOL).unwrap();
        assert!(!report.complete);
        assert_eq!(report.numerical_rank, n - 1);
    }

    #[test]
    fn energies_are_incomplete_where_a_momentum_vanishes() {
        let s = CanonicalState::new(vec![0.3, -0.1], vec![0.5, 0.0], 0.0).unwrap();
        let obs = string_observable_set(2).unwrap();
        let j = completeness_jacobian(&obs, &s, DEFAULT_FD_STEP).unwrap();
        assert!(!completeness_report(&j, DEFAULT_RANK_TOL).unwrap().complete);
    }

    fn modes_strategy(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (proptest::collection::vec(-1.0f64..1.0, n), proptest::collection::vec(-1.0f64..1.0, n))
    }

    proptest! {
        #[test]
        fn band_limited_round_trip((a, adot) in modes_strategy(12)) {
            let m = ModeState::new(a, adot, 0.0).unwrap();
            let f = StringField::from_modes(&m, DEFAULT_INTERVALS).unwrap();
            let back = sine_modes(&f, 12).unwrap();
            prop_assert!(back.max_difference(&m) < 1e-12);
            let g = StringField::from_modes(&back, DEFAULT_INTERVALS).unwrap();
            let err = f.u().iter().zip(g.u()).chain(f.v().iter().zip(g.v()))
                .map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn energies_invariant_under_exact_flow((a, adot) in modes_strategy(8), t in -50.0f64..50.0) {
            let m = ModeState::new(a, adot, 0.0).unwrap();
            let e0 = m.energies();
            let e1 = exact_mode_evolution(&m, t).energies();
            for (x, y) in e0.iter().zip(&e1) {
                prop_assert!((x - y).abs() <= 1e-12 * x.max(1e-3));
            }
        }

        #[test]
        fn mode_energies_sum_to_hamiltonian((a, adot) in modes_strategy(6)) {
            let m = ModeState::new(a.clone(), adot.clone(), 0.0).unwrap();
            let direct: f64 = (0..6).map(|i| {
                let n = (i + 1) as f64;
                0.5 * (adot[i] * adot[i] + n * n * a[i] * a[i])
            }).sum();
            let sys = string_hamiltonian_system(6).unwrap();
            prop_assert!((m.hamiltonian() - direct).abs() < 1e-14 * direct.max(1.0));
            prop_assert!((sys.energy(&m.to_canonical()) - direct).abs() < 1e-14 * direct.max(1.0));
        }
    }
}
