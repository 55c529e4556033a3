//! Central-difference gradients, Poisson brackets and the momentum Jacobian.

use nalgebra::DMatrix;

use super::{CanonicalState, Observable, ObservableSet};
use crate::{Error, Result};

/// Default finite-difference step for unit-scaled states.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")))
    }
}

fn central(f: &Observable, plus: &CanonicalState, minus: &CanonicalState, h: f64) -> Result<f64> {
    Ok((f.evaluate(plus)? - f.evaluate(minus)?) / (2.0 * h))
}

/// `∂f/∂q_k` by central differences.
pub fn fd_partial_q(f: &Observable, s: &CanonicalState, k: usize, h: f64) -> Result<f64> {
    let q = s.q()[k];
    central(f, &s.with_q(k, q + h), &s.with_q(k, q - h), h)
}

/// `∂f/∂p_k` by central differences.
pub fn fd_partial_p(f: &Observable, s: &CanonicalState, k: usize, h: f64) -> Result<f64> {
    let p = s.p()[k];
    central(f, &s.with_p(k, p + h), &s.with_p(k, p - h), h)
}

/// Full central-difference gradient `(∂f/∂q, ∂f/∂p)`.
pub fn fd_gradient(f: &Observable, s: &CanonicalState, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_step(h)?;
    f.evaluate(s)?;
    let gq = (0..s.dim()).map(|k| fd_partial_q(f, s, k, h)).collect::<Result<Vec<_>>>()?;
    let gp = (0..s.dim()).map(|k| fd_partial_p(f, s, k, h)).collect::<Result<Vec<_>>>()?;
    Ok((gq, gp))
}

// Each term is `a·b − c·d`; swapping the operands negates every term exactly
// (rounding is sign-symmetric), and the sum runs in index order, so
// `{f, g} == -{g, f}` bit for bit.
fn bracket_from_gradients(f: &(Vec<f64>, Vec<f64>), g: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (fq, fp) = f;
    let (gq, gp) = g;
    (0..fq.len()).map(|k| fq[k] * gp[k] - fp[k] * gq[k]).sum()
}

/// `{f, g} = Σ_k (∂f/∂q_k ∂g/∂p_k − ∂f/∂p_k ∂g/∂q_k)` with central-difference
/// gradients of step `h`.
pub fn poisson_bracket(f: &Observable, g: &Observable, s: &CanonicalState, h: f64) -> Result<f64> {
    let gf = fd_gradient(f, s, h)?;
    let gg = fd_gradient(g, s, h)?;
    Ok(bracket_from_gradients(&gf, &gg))
}

/// The same bracket from the observables' analytic gradients, when both carry one.
pub fn analytic_poisson_bracket(f: &Observable, g: &Observable, s: &CanonicalState) -> Option<f64> {
    let gf = f.analytic_gradient(s)?;
    let gg = g.analytic_gradient(s)?;
    Some(bracket_from_gradients(&gf, &gg))
}

/// `J[i][j] = ∂f_i/∂p_j` by central differences, shape `len(obs) × dim`.
pub fn completeness_jacobian(obs: &ObservableSet, s: &CanonicalState, h: f64) -> Result<DMatrix<f64>> {
    check_step(h)?;
    let n = s.dim();
    let mut jac = DMatrix::zeros(obs.len(), n);
    for j in 0..n {
        let p = s.p()[j];
        let plus = s.with_p(j, p + h);
        let minus = s.with_p(j, p - h);
        for (i, f) in obs.iter().enumerate() {
            jac[(i, j)] = central(f, &plus, &minus, h)?;
        }
    }
    Ok(jac)
}

/// Matrix of pairwise brackets `B[i][j] = {f_i, f_j}`; each unordered pair is
/// computed once and negated into the transposed slot.
pub fn involution_matrix(obs: &ObservableSet, s: &CanonicalState, h: f64) -> Result<DMatrix<f64>> {
    check_step(h)?;
    let grads = obs.iter().map(|f| fd_gradient(f, s, h)).collect::<Result<Vec<_>>>()?;
    let m = obs.len();
    let mut b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = bracket_from_gradients(&grads[i], &grads[j]);
            b[(i, j)] = v;
            b[(j, i)] = -v;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(q: Vec<f64>, p: Vec<f64>) -> CanonicalState {
        CanonicalState::new(q, p, 0.0).unwrap()
    }

    #[test]
    fn canonical_pair_brackets() {
        let s = state(vec![0.3, -1.2], vec![0.7, 2.0]);
        let h = DEFAULT_FD_STEP;
        let q1 = Observable::coordinate(0);
        let q2 = Observable::coordinate(1);
        let p1 = Observable::momentum(0);
        assert!((poisson_bracket(&q1, &p1, &s, h).unwrap() - 1.0).abs() < 10.0 * h * h);
        assert!(poisson_bracket(&q1, &q2, &s, h).unwrap().abs() < 10.0 * h * h);
    }

    #[test]
    fn nonpositive_step_is_rejected() {
        let s = state(vec![0.0], vec![0.0]);
        let q1 = Observable::coordinate(0);
        assert!(poisson_bracket(&q1, &q1, &s, 0.0).is_err());
        assert!(poisson_bracket(&q1, &q1, &s, -1e-5).is_err());
    }

    #[test]
    fn stencil_failure_names_observable() {
        // finite at the state, singular one step away
        let f = Observable::new("log_q", |s: &CanonicalState| s.q()[0].ln());
        let g = Observable::momentum(0);
        let s = state(vec![1e-6], vec![0.0]);
        match poisson_bracket(&g, &f, &s, 1e-5) {
            Err(Error::Evaluation { observable }) => assert_eq!(observable, "log_q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn momentum_set_gives_identity_jacobian() {
        let n = 5;
        let s = state(vec![0.1; n], vec![-0.4; n]);
        let obs = ObservableSet::new((0..n).map(Observable::momentum).collect()).unwrap();
        let j = completeness_jacobian(&obs, &s, DEFAULT_FD_STEP).unwrap();
        assert!((j - DMatrix::<f64>::identity(n, n)).amax() < 1e-10);
    }

    #[test]
    fn involution_of_canonical_pair_and_singleton() {
        let s = state(vec![0.5], vec![-0.25]);
        let obs = ObservableSet::new(vec![Observable::coordinate(0), Observable::momentum(0)]).unwrap();
        let b = involution_matrix(&obs, &s, DEFAULT_FD_STEP).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((b - expected).amax() < 1e-9);

        let single = ObservableSet::new(vec![Observable::coordinate(0)]).unwrap();
        let b = involution_matrix(&single, &s, DEFAULT_FD_STEP).unwrap();
        assert_eq!(b.shape(), (1, 1));
        assert_eq!(b[(0, 0)], 0.0);
    }

    fn cubic(name: &str, a: f64) -> Observable {
        Observable::new(name, move |s: &CanonicalState| {
            let (q, p) = (s.q(), s.p());
            a * q[0] * q[0] * p[1] + (q[1] * p[0]).sin() + p[0].powi(3)
        })
    }

    proptest! {
        #[test]
        fn bracket_is_bitwise_antisymmetric(
            q in proptest::collection::vec(-2.0f64..2.0, 2),
            p in proptest::collection::vec(-2.0f64..2.0, 2),
        ) {
            let s = state(q, p);
            let f = cubic("f", 0.7);
            let g = cubic("g", -1.3);
            let fg = poisson_bracket(&f, &g, &s, DEFAULT_FD_STEP).unwrap();
            let gf = poisson_bracket(&g, &f, &s, DEFAULT_FD_STEP).unwrap();
            prop_assert_eq!(fg.to_bits(), (-gf).to_bits());
        }

        #[test]
        fn canonical_relations_hold(
            q in proptest::collection::vec(-3.0f64..3.0, 3),
            p in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let h = DEFAULT_FD_STEP;
            let s = state(q, p);
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let qp = poisson_bracket(&Observable::coordinate(i), &Observable::momentum(j), &s, h).unwrap();
                    let qq = poisson_bracket(&Observable::coordinate(i), &Observable::coordinate(j), &s, h).unwrap();
                    let pp = poisson_bracket(&Observable::momentum(i), &Observable::momentum(j), &s, h).unwrap();
                    prop_assert!((qp - delta).abs() < 10.0 * h * h);
                    prop_assert!(qq.abs() < 10.0 * h * h);
                    prop_assert!(pp.abs() < 10.0 * h * h);
                }
            }
        }
    }
}
