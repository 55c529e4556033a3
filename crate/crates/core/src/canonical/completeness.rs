//! Rank diagnostics of the momentum Jacobian and momentum recovery from
//! recorded integral values.
//!
//! All verdicts are pointwise and "at truncation N": a family of integrals
//! whose Jacobian `∂f_i/∂p_j` has full column rank at a state determines the
//! momenta locally there. Where some of its singular values vanish (for the
//! mode energies, wherever some `p_n = 0`) the report is incomplete at that
//! point only.

use nalgebra::{DMatrix, DVector};

use super::bracket::completeness_jacobian;
use super::{CanonicalState, ObservableSet};
use crate::{Error, Result};

/// Default relative threshold for the numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CompletenessReport {
    pub jacobian: DMatrix<f64>,
    /// Descending, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// Count of singular values above `rank_tol · σ_max`.
    pub numerical_rank: usize,
    /// Smallest singular value of the map onto the momenta; zero when there
    /// are fewer integrals than momenta.
    pub min_singular: f64,
    pub complete: bool,
    /// Phase-space dimension `N` (the number of momenta).
    pub dim: usize,
    pub rank_tol: f64,
}

impl CompletenessReport {
    pub fn condition_number(&self) -> f64 {
        match self.singular_values.first() {
            Some(&max) if self.min_singular > 0.0 => max / self.min_singular,
            _ => f64::INFINITY,
        }
    }
}

pub fn completeness_report(jacobian: &DMatrix<f64>, rank_tol: f64) -> Result<CompletenessReport> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    let (rows, dim) = jacobian.shape();
    if rows == 0 || dim == 0 {
        return Err(Error::Dimension(format!("empty Jacobian ({rows}×{dim})")));
    }
    let mut singular_values: Vec<f64> = jacobian.clone().svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = singular_values[0];
    let numerical_rank =
        if sigma_max > 0.0 { singular_values.iter().filter(|&&s| s > rank_tol * sigma_max).count() } else { 0 };
    let min_singular = if rows < dim { 0.0 } else { *singular_values.last().unwrap() };
    Ok(CompletenessReport {
        jacobian: jacobian.clone(),
        singular_values,
        numerical_rank,
        min_singular,
        complete: rows >= dim && numerical_rank == dim,
        dim,
        rank_tol,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Convergence threshold on `max_i |f_i(q, p) − α_i|`.
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub rank_tol: f64,
    /// Step halvings tried when the residual grows.
    pub max_halvings: usize,
    /// Time at which the observables are evaluated.
    pub t: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            fd_step: super::bracket::DEFAULT_FD_STEP,
            rank_tol: DEFAULT_RANK_TOL,
            max_halvings: 30,
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentumRecovery {
    pub p: Vec<f64>,
    pub iterations: usize,
    /// Final `max_i |f_i − α_i|`.
    pub residual: f64,
}

fn residual(obs: &ObservableSet, alpha: &[f64], s: &CanonicalState) -> Result<Vec<f64>> {
    Ok(obs.evaluate(s)?.iter().zip(alpha).map(|(f, a)| f - a).collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `f_i(q, p) = α_i` for `p` by damped Newton iteration on the
/// residual, using the central-difference momentum Jacobian.
///
/// The guess selects the branch: the integrals are typically even in some
/// momenta, so the sign pattern of `p_guess` is what is recovered.
pub fn recover_momenta(
    obs: &ObservableSet,
    alpha: &[f64],
    q: &[f64],
    p_guess: &[f64],
    opts: &NewtonOptions,
) -> Result<MomentumRecovery> {
    if alpha.len() != obs.len() {
        return Err(Error::Dimension(format!("{} target values for {} observables", alpha.len(), obs.len())));
    }
    let mut state = CanonicalState::new(q.to_vec(), p_guess.to_vec(), opts.t)?;
    let dim = state.dim();
    if obs.len() < dim {
        let jac = completeness_jacobian(obs, &state, opts.fd_step)?;
        return Err(Error::Incomplete(Box::new(completeness_report(&jac, opts.rank_tol)?)));
    }

    let mut r = residual(obs, alpha, &state)?;
    let mut iterations = 0;
    loop {
        let res = max_abs(&r);
        if res < opts.tol {
            return Ok(MomentumRecovery { p: state.p().to_vec(), iterations, residual: res });
        }
        if iterations == opts.max_iter {
            return Err(Error::Divergence { iterations, residual: res });
        }
        iterations += 1;

        let jac = completeness_jacobian(obs, &state, opts.fd_step)?;
        let report = completeness_report(&jac, opts.rank_tol)?;
        if !report.complete {
            return Err(Error::Incomplete(Box::new(report)));
        }
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|x| -x));
        let step = jac.svd(true, true).solve(&rhs, 0.0).map_err(|e| Error::Convergence(e.to_string()))?;

        let current = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let p_try: Vec<f64> = state.p().iter().zip(step.iter()).map(|(p, d)| p + lambda * d).collect();
            let trial = state.with_momenta(&p_try)?;
            let r_try = residual(obs, alpha, &trial)?;
            let better = norm2(&r_try) < current;
            accepted = Some((trial, r_try));
            if better {
                break;
            }
            lambda *= 0.5;
        }
        let (next, r_next) = accepted.expect("at least one trial step");
        state = next;
        r = r_next;
    }
}
