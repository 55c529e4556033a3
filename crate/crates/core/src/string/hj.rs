//! Hamilton–Jacobi separation for the string modes.
//!
//! With `S = −E t + Σ_n S_n(a_n)` the Hamilton–Jacobi equation splits into
//! `(dS_n/da_n)² + n² a_n² = E_n`, `Σ E_n = 2E`. The separation constants are
//! `E_n = 2 f_n`. Solving `∂S/∂E_n = β_n` gives
//! `arcsin(n a_n / √E_n) = n (t + 2β_n)`, which is evaluated in amplitude–phase
//! form `a_n = (√E_n / n) sin(n t + 2nβ_n)` so no arcsine branch has to be
//! tracked across turning points.

use log::warn;

use super::ModeState;
use crate::{Error, Result};

/// Separation constants `E_n` and the total energy `E = ½ Σ E_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationData {
    energies: Vec<f64>,
    total: f64,
}

impl SeparationData {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Dimension("no separation constants".into()));
        }
        if energies.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidArgument("separation constants must be finite and >= 0".into()));
        }
        let total = 0.5 * energies.iter().sum::<f64>();
        Ok(Self { energies, total })
    }

    /// `E_n = a'_n² + n² a_n²` and the phases `β_n` that reproduce `m` at `m.t`.
    pub fn from_modes(m: &ModeState) -> (Self, Vec<f64>) {
        let energies: Vec<f64> = (0..m.modes())
            .map(|i| {
                let n = (i + 1) as f64;
                m.adot()[i].powi(2) + n * n * m.a()[i].powi(2)
            })
            .collect();
        let beta = (0..m.modes())
            .map(|i| {
                let n = (i + 1) as f64;
                let phase = (n * m.a()[i]).atan2(m.adot()[i]) - n * m.t();
                phase / (2.0 * n)
            })
            .collect();
        (Self::new(energies).expect("energies of a finite state are valid"), beta)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `E`, the value of the Hamiltonian.
    pub fn total(&self) -> f64 {
        self.total
    }
}

fn allowed_gap(n: usize, a: f64, energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(Error::Domain(format!("negative separation constant {energy}")));
    }
    let nf = n as f64;
    let gap = energy - nf * nf * a * a;
    // rounding at the turning point
    if gap < 0.0 && gap >= -8.0 * f64::EPSILON * energy {
        return Ok(0.0);
    }
    if gap < 0.0 {
        return Err(Error::Domain(format!("mode {n}: n²a² = {} exceeds E_n = {energy}", energy - gap)));
    }
    Ok(gap)
}

/// `S_n(a) = (a/2)√(E_n − n²a²) + (E_n/2n) arcsin(n a/√E_n)`, normalized by `S_n(0) = 0`.
pub fn hj_action(n: usize, a: f64, energy: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode index starts at 1".into()));
    }
    let gap = allowed_gap(n, a, energy)?;
    if energy == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let ratio = (nf * a / energy.sqrt()).clamp(-1.0, 1.0);
    Ok(0.5 * a * gap.sqrt() + energy / (2.0 * nf) * ratio.asin())
}

/// `dS_n/da = √(E_n − n²a²)`, the momentum on the positive branch.
pub fn hj_action_slope(n: usize, a: f64, energy: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode index starts at 1".into()));
    }
    Ok(allowed_gap(n, a, energy)?.sqrt())
}

/// The solution `t ↦ (a_n(t), a'_n(t))` determined by `(E_n, β_n)`.
#[derive(Debug, Clone)]
pub struct HjTrajectory {
    amplitude: Vec<f64>,
    phase: Vec<f64>,
    stationary: Vec<usize>,
}

impl HjTrajectory {
    pub fn at(&self, t: f64) -> ModeState {
        let (a, adot) = self
            .amplitude
            .iter()
            .zip(&self.phase)
            .enumerate()
            .map(|(i, (&amp, &phase))| {
                let n = (i + 1) as f64;
                let (s, c) = (n * t + phase).sin_cos();
                (amp / n * s, amp * c)
            })
            .unzip();
        ModeState::new(a, adot, t).expect("finite trajectory")
    }

    /// One-based indices of the zero-energy modes, held at rest.
    pub fn stationary_modes(&self) -> &[usize] {
        &self.stationary
    }
}

pub fn hj_trajectory(sep: &SeparationData, beta: &[f64]) -> Result<HjTrajectory> {
    if beta.len() != sep.energies.len() {
        return Err(Error::Dimension(format!("{} phases for {} separation constants", beta.len(), sep.energies.len())));
    }
    let mut stationary = Vec::new();
    let mut amplitude = Vec::with_capacity(beta.len());
    let mut phase = Vec::with_capacity(beta.len());
    for (i, (&e, &b)) in sep.energies.iter().zip(beta).enumerate() {
        let n = (i + 1) as f64;
        if e == 0.0 {
            stationary.push(i + 1);
            amplitude.push(0.0);
            phase.push(0.0);
        } else {
            amplitude.push(e.sqrt());
            phase.push(2.0 * n * b);
        }
    }
    if !stationary.is_empty() {
        warn!("zero-energy modes {stationary:?} excluded from the phase inversion (held at rest)");
    }
    Ok(HjTrajectory { amplitude, phase, stationary })
}

/// Residuals of Hamilton's equations for `H = ½ Σ (p_n² + n² q_n²)` along a
/// trajectory, with time derivatives from a fourth-order central stencil.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonResidual {
    /// `max_n |da_n/dt − ∂H/∂p_n|`.
    pub coordinate: f64,
    /// `max_n |dp_n/dt + ∂H/∂q_n|`.
    pub momentum: f64,
    /// `‖u_tt − u_xx‖` in `L²(0, 2π)` for the synthesized field, i.e.
    /// `√(π Σ_n (a''_n + n² a_n)²)`.
    pub wave_l2: f64,
}

pub fn hamilton_residual(traj: &HjTrajectory, t: f64, dt: f64) -> HamiltonResidual {
    let at = |k: f64| traj.at(t + k * dt);
    let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
    let centre = traj.at(t);
    let d = |f: fn(&ModeState) -> &[f64], i: usize| {
        (f(&m2)[i] - 8.0 * f(&m1)[i] + 8.0 * f(&p1)[i] - f(&p2)[i]) / (12.0 * dt)
    };
    let mut coordinate = 0.0f64;
    let mut momentum = 0.0f64;
    let mut wave = 0.0;
    for i in 0..centre.modes() {
        let n = (i + 1) as f64;
        let da = d(ModeState::a, i);
        let dadot = d(ModeState::adot, i);
        coordinate = coordinate.max((da - centre.adot()[i]).abs());
        let r = dadot + n * n * centre.a()[i];
        momentum = momentum.max(r.abs());
        wave += r * r;
    }
    HamiltonResidual { coordinate, momentum, wave_l2: (std::f64::consts::PI * wave).sqrt() }
}
