//! Dormand–Prince 5(4) for a complex two-component system.

use num_complex::Complex64;

use crate::{Error, Result};

pub(crate) type State = [Complex64; 2];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth- minus fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn axpy(y: &State, h: f64, coeffs: &[f64], k: &[State]) -> State {
    let mut out = *y;
    for (c, ki) in coeffs.iter().zip(k) {
        if *c != 0.0 {
            out[0] += ki[0] * (h * c);
            out[1] += ki[1] * (h * c);
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1 > x0`.
pub(crate) fn integrate(
    f: impl Fn(f64, &State) -> State,
    x0: f64,
    x1: f64,
    y0: State,
    tol: Tolerances,
) -> Result<State> {
    let span = x1 - x0;
    let mut x = x0;
    let mut y = y0;
    let mut h = span * 1e-3;
    let h_min = span * 1e-13;
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    k[0] = f(x, &y);
    for _ in 0..tol.max_steps {
        if x >= x1 {
            return Ok(y);
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        for s in 1..7 {
            let ys = axpy(&y, h, &A[s][..s], &k[..s]);
            k[s] = f(x + C[s] * h, &ys);
        }
        let y_new = axpy(&y, h, &A[6], &k[..6]);
        let err_vec = axpy(&[Complex64::new(0.0, 0.0); 2], h, &E, &k);
        let err = (0..2)
            .map(|i| err_vec[i].norm() / (tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm())))
            .fold(0.0, f64::max);
        if !err.is_finite() {
            return Err(Error::StepSize(format!("non-finite error estimate at x = {x}")));
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + h };
            y = y_new;
            // first-same-as-last
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < h_min && x < x1 {
            return Err(Error::StepSize(format!("step collapsed to {h:e} at x = {x}")));
        }
    }
    if x >= x1 {
        return Ok(y);
    }
    Err(Error::StepSize(format!("exceeded {} steps before reaching x = {x1}", tol.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let tol = Tolerances { rtol: 1e-12, atol: 1e-14, max_steps: 100_000 };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let y = integrate(|_, y| [y[1], -y[0]], 0.0, 10.0, [one, zero], tol).unwrap();
        assert!((y[0].re - 10f64.cos()).abs() < 1e-10);
        assert!((y[1].re + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn complex_exponential() {
        let tol = Tolerances { rtol: 1e-12, atol: 1e-14, max_steps: 100_000 };
        let i = Complex64::i();
        let y = integrate(|_, y| [i * 3.0 * y[0], y[1]], 0.0, 2.0, [Complex64::new(1.0, 0.0); 2], tol).unwrap();
        assert!((y[0] - (i * 6.0).exp()).norm() < 1e-10);
        assert!((y[1].re - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn step_budget_is_enforced() {
        let tol = Tolerances { rtol: 1e-12, atol: 1e-14, max_steps: 5 };
        let one = Complex64::new(1.0, 0.0);
        assert!(matches!(integrate(|_, y| [y[1], -y[0]], 0.0, 100.0, [one, one], tol), Err(Error::StepSize(_))));
    }
}
