//! Behaviour of the plain moments `∫ xⁿ u_t dx` under the wave flow.
//!
//! Integrating by parts twice, `d/dt ∫ xⁿ u_t = n(n−1) ∫ x^{n−2} u`, and
//! `d/dt ∫ x^m u = ∫ x^m u_t`. The pair closes on lower moments, so the exact
//! change over `[0, T]` is the finite sum
//!
//! ```text
//! Σ_{i≥1} n!/(n−2i)! · [ T^{2i−1}/(2i−1)! ∫x^{n−2i}u + T^{2i}/(2i)! ∫x^{n−2i}u_t ]
//! ```
//!
//! evaluated at `t = 0`. Only `n = 0, 1` are first integrals in general.

use super::{dalembert_evolve, LineField};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentDriftReport {
    pub n: u32,
    pub horizon: f64,
    pub initial: f64,
    /// `max_t |∫xⁿu_t(t) − ∫xⁿu_t(0)|` over the sampled times.
    pub max_drift: f64,
    /// Signed change at `t = T`.
    pub final_drift: f64,
    /// Signed change at `t = T` predicted by the moment recursion.
    pub predicted_final_drift: f64,
    pub tolerance: f64,
    /// `max_drift < tolerance`.
    pub conserved: bool,
}

fn power_moment(f: &LineField, w: &[f64], m: u32) -> f64 {
    f.integrate_with(w, |x| x.powi(m as i32))
}

fn falling_factorial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Exact change of `∫xⁿu_t` over `[0, T]` from the initial moments.
pub fn predicted_moment_drift(f: &LineField, n: u32, horizon: f64) -> f64 {
    let mut total = 0.0;
    let mut i = 1;
    while 2 * i <= n {
        let c = falling_factorial(n, 2 * i);
        let m = n - 2 * i;
        total += c
            * (horizon.powi(2 * i as i32 - 1) / factorial(2 * i - 1) * power_moment(f, f.u(), m)
                + horizon.powi(2 * i as i32) / factorial(2 * i) * power_moment(f, f.v(), m));
        i += 1;
    }
    total
}

/// Samples `∫xⁿu_t` at `steps + 1` equally spaced times in `[0, T]`, each
/// evolved directly from `f`.
pub fn remark2_drift(f: &LineField, n: u32, horizon: f64, steps: usize, tolerance: f64) -> Result<MomentDriftReport> {
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one time step".into()));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let initial = power_moment(f, f.v(), n);
    let mut max_drift = 0.0f64;
    let mut final_drift = 0.0;
    for s in 1..=steps {
        let t = horizon * s as f64 / steps as f64;
        let g = dalembert_evolve(f, t)?;
        let d = power_moment(&g, g.v(), n) - initial;
        max_drift = max_drift.max(d.abs());
        final_drift = d;
    }
    Ok(MomentDriftReport {
        n,
        horizon,
        initial,
        max_drift,
        final_drift,
        predicted_final_drift: predicted_moment_drift(f, n, horizon),
        tolerance,
        conserved: max_drift < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> LineField {
        LineField::from_fn(
            20.0,
            1024,
            |x| (x + 0.5) * (-(x - 0.3) * (x - 0.3)).exp(),
            |x| (1.0 - 0.4 * x + 0.3 * x * x) * (-x * x / 1.5).exp(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn low_moments_are_conserved() {
        let f = generic();
        for n in [0, 1] {
            let r = remark2_drift(&f, n, 3.0, 12, 1e-10).unwrap();
            assert!(r.conserved, "{r:?}");
            assert_eq!(r.predicted_final_drift, 0.0);
        }
    }

    #[test]
    fn second_moment_drifts_as_predicted() {
        let f = generic();
        let r = remark2_drift(&f, 2, 3.0, 6, 1e-10).unwrap();
        assert!(!r.conserved);
        assert!((r.final_drift - r.predicted_final_drift).abs() < 1e-9 * r.predicted_final_drift.abs());
    }

    #[test]
    fn higher_moments_follow_recursion() {
        let f = generic();
        for n in [3, 4] {
            let r = remark2_drift(&f, n, 2.0, 1, 1e-10).unwrap();
            assert!((r.final_drift - r.predicted_final_drift).abs() < 1e-8 * r.predicted_final_drift.abs(), "{r:?}");
        }
    }
}
