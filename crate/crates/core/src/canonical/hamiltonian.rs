//! Hamiltonian systems on the truncated phase space and their time stepping.

use std::fmt;
use std::sync::Arc;

use super::bracket::{fd_gradient, DEFAULT_FD_STEP};
use super::{CanonicalState, Observable, ObservableSet, Trajectory};
use crate::{Error, Result};

type ScalarFn = dyn Fn(&CanonicalState) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&CanonicalState) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Gradients {
    Analytic { grad_q: Arc<VectorFn>, grad_p: Arc<VectorFn> },
    FiniteDifference { step: f64 },
}

/// `H(q, p, t)` with its gradients, either analytic or central-difference.
///
/// Separable systems (`H = T(p) + V(q, t)`) are advanced with Störmer–Verlet;
/// everything else goes through the implicit midpoint rule.
#[derive(Clone)]
pub struct HamiltonianSystem {
    dim: usize,
    energy: Arc<ScalarFn>,
    gradients: Gradients,
    separable: bool,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("dim", &self.dim)
            .field("separable", &self.separable)
            .field("analytic", &matches!(self.gradients, Gradients::Analytic { .. }))
            .finish()
    }
}

impl HamiltonianSystem {
    /// A non-separable system with finite-difference gradients.
    pub fn new<H>(dim: usize, energy: H) -> Result<Self>
    where
        H: Fn(&CanonicalState) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Dimension("Hamiltonian system needs dim >= 1".into()));
        }
        Ok(Self {
            dim,
            energy: Arc::new(energy),
            gradients: Gradients::FiniteDifference { step: DEFAULT_FD_STEP },
            separable: false,
        })
    }

    pub fn with_gradients<GQ, GP>(mut self, grad_q: GQ, grad_p: GP) -> Self
    where
        GQ: Fn(&CanonicalState) -> Vec<f64> + Send + Sync + 'static,
        GP: Fn(&CanonicalState) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradients = Gradients::Analytic { grad_q: Arc::new(grad_q), grad_p: Arc::new(grad_p) };
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.gradients = Gradients::FiniteDifference { step };
        self
    }

    /// Declares `H = T(p) + V(q, t)`, enabling the explicit Verlet step.
    pub fn separable(mut self) -> Self {
        self.separable = true;
        self
    }

    pub fn is_separable(&self) -> bool {
        self.separable
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energy(&self, s: &CanonicalState) -> f64 {
        (self.energy)(s)
    }

    pub fn as_observable(&self, name: impl Into<String>) -> Observable {
        let energy = self.energy.clone();
        Observable::new(name, move |s: &CanonicalState| energy(s))
    }

    fn fd_observable(&self) -> Observable {
        self.as_observable("H")
    }

    pub fn grad_q(&self, s: &CanonicalState) -> Result<Vec<f64>> {
        let g = match &self.gradients {
            Gradients::Analytic { grad_q, .. } => grad_q(s),
            Gradients::FiniteDifference { step } => fd_gradient(&self.fd_observable(), s, *step)?.0,
        };
        self.check_len(g)
    }

    pub fn grad_p(&self, s: &CanonicalState) -> Result<Vec<f64>> {
        let g = match &self.gradients {
            Gradients::Analytic { grad_p, .. } => grad_p(s),
            Gradients::FiniteDifference { step } => fd_gradient(&self.fd_observable(), s, *step)?.1,
        };
        self.check_len(g)
    }

    fn check_len(&self, g: Vec<f64>) -> Result<Vec<f64>> {
        if g.len() != self.dim {
            return Err(Error::Dimension(format!("gradient of length {} for dim {}", g.len(), self.dim)));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation { observable: "H".into() });
        }
        Ok(g)
    }

    /// Largest deviation between the analytic gradient and a central-difference
    /// gradient of step `h`. `None` when the system has no analytic gradient.
    pub fn gradient_mismatch(&self, s: &CanonicalState, h: f64) -> Result<Option<f64>> {
        if let Gradients::FiniteDifference { .. } = self.gradients {
            return Ok(None);
        }
        let (fq, fp) = fd_gradient(&self.fd_observable(), s, h)?;
        let gq = self.grad_q(s)?;
        let gp = self.grad_p(s)?;
        let diff = fq.iter().zip(&gq).chain(fp.iter().zip(&gp)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok(Some(diff))
    }

    fn check_state(&self, s: &CanonicalState) -> Result<()> {
        if s.dim() != self.dim {
            return Err(Error::Dimension(format!("state of dim {} for system of dim {}", s.dim(), self.dim)));
        }
        Ok(())
    }
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

/// One step of the flow of `sys`: kick–drift–kick Störmer–Verlet for
/// separable systems, implicit midpoint otherwise. Time advances by `dt`.
pub fn symplectic_step(sys: &HamiltonianSystem, s: &CanonicalState, dt: f64) -> Result<CanonicalState> {
    sys.check_state(s)?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be finite and nonzero, got {dt}")));
    }
    if sys.is_separable() {
        verlet_step(sys, s, dt)
    } else {
        implicit_midpoint_step(sys, s, dt)
    }
}

fn verlet_step(sys: &HamiltonianSystem, s: &CanonicalState, dt: f64) -> Result<CanonicalState> {
    let half = 0.5 * dt;
    let t1 = s.t() + dt;
    let p_half = axpy(s.p(), -half, &sys.grad_q(s)?);
    let mid = CanonicalState::from_parts(s.q().to_vec(), p_half, s.t());
    let q1 = axpy(s.q(), dt, &sys.grad_p(&mid)?);
    let drifted = CanonicalState::from_parts(q1, mid.p().to_vec(), t1);
    let p1 = axpy(drifted.p(), -half, &sys.grad_q(&drifted)?);
    let (q1, _, _) = drifted.into_parts();
    CanonicalState::new(q1, p1, t1).map_err(|_| Error::BlowUp { last_stable_time: s.t() })
}

const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_MAX_ITER: usize = 200;

/// Implicit midpoint rule solved by fixed-point iteration.
pub fn implicit_midpoint_step(sys: &HamiltonianSystem, s: &CanonicalState, dt: f64) -> Result<CanonicalState> {
    sys.check_state(s)?;
    let tm = s.t() + 0.5 * dt;
    let (q0, p0) = (s.q(), s.p());
    let mut q1 = q0.to_vec();
    let mut p1 = p0.to_vec();
    for _ in 0..MIDPOINT_MAX_ITER {
        let qm: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| 0.5 * (a + b)).collect();
        let pm: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| 0.5 * (a + b)).collect();
        let mid = CanonicalState::from_parts(qm, pm, tm);
        let diverged = |_| Error::Convergence(format!("fixed-point iterate left the finite range at t = {}", s.t()));
        let q_next = axpy(q0, dt, &sys.grad_p(&mid).map_err(diverged)?);
        let p_next = axpy(p0, -dt, &sys.grad_q(&mid).map_err(diverged)?);
        let change =
            q_next.iter().zip(&q1).chain(p_next.iter().zip(&p1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = q_next.iter().chain(&p_next).fold(1.0f64, |m, x| m.max(x.abs()));
        q1 = q_next;
        p1 = p_next;
        if !change.is_finite() {
            break;
        }
        if change <= MIDPOINT_TOL * scale {
            return CanonicalState::new(q1, p1, s.t() + dt);
        }
    }
    Err(Error::Convergence(format!(
        "implicit midpoint did not converge in {MIDPOINT_MAX_ITER} iterations at t = {} (dt = {dt})",
        s.t()
    )))
}

/// Applies `n_steps` symplectic steps, recording every `stride`-th state,
/// plus the initial and final states.
pub fn evolve(
    sys: &HamiltonianSystem,
    s: &CanonicalState,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("evolve needs dt > 0, got {dt}")));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be >= 1".into()));
    }
    let mut traj = Trajectory::new(s.clone());
    let mut state = s.clone();
    for step in 1..=n_steps {
        state = symplectic_step(sys, &state, dt)?;
        if step % stride == 0 || step == n_steps {
            traj.push(state.clone())?;
        }
    }
    Ok(traj)
}

/// Default floor for the relative drift denominator.
pub const DEFAULT_DRIFT_FLOOR: f64 = 1e-12;

/// Per observable, `max_t |f(s(t)) − f(s(0))| / max(|f(s(0))|, floor)`.
pub fn conservation_drift(obs: &ObservableSet, traj: &Trajectory, floor: f64) -> Result<Vec<f64>> {
    let initial = obs.evaluate(traj.first())?;
    let mut drift = vec![0.0f64; obs.len()];
    for s in traj.states() {
        for ((d, f), f0) in drift.iter_mut().zip(obs.evaluate(s)?).zip(&initial) {
            *d = d.max((f - f0).abs() / f0.abs().max(floor));
        }
    }
    Ok(drift)
}
