//! Two solitons overtaking each other: exact τ-function solution as oracle,
//! shapes compared after aligning troughs.

use integrable_core::kdv::{
    conserved_integrals, locate_trough, riccati_densities, two_soliton, two_soliton_phase_shifts, KdvStepper,
    PeriodicField,
};

const PERIOD: f64 = 80.0;
const POINTS: usize = 1024;
const K_FAST: f64 = 1.0;
const K_SLOW: f64 = 0.5;
const X_FAST: f64 = 26.0;
const X_SLOW: f64 = 40.0;

fn exact(t: f64) -> PeriodicField {
    PeriodicField::from_fn(POINTS, PERIOD, t, |x| two_soliton(K_FAST, X_FAST, K_SLOW, X_SLOW, t, x)).unwrap()
}

/// `max_s |a(xa + s) − b(xb + s)|` for `|s| ≤ radius`.
fn aligned_difference(a: &PeriodicField, xa: f64, b: &PeriodicField, xb: f64, radius: f64) -> f64 {
    let (fa, fb) = (a.interpolator(), b.interpolator());
    let n = 400;
    (0..=n)
        .map(|i| {
            let s = -radius + 2.0 * radius * i as f64 / n as f64;
            (fa(xa + s) - fb(xb + s)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn overtaking_collision_preserves_shapes() {
    let t_end = 9.6;
    let dt = 2e-4;
    let start = exact(0.0);
    let stepper = KdvStepper::new(POINTS, PERIOD, dt).unwrap();
    let end = stepper.advance(&start, (t_end / dt).round() as usize).unwrap();

    // before: fast soliton behind, slow one displaced forward by the interaction
    let (shift_fast, shift_slow) = two_soliton_phase_shifts(K_FAST, K_SLOW);
    let fast0 = locate_trough(&start, X_FAST, 2.0).unwrap();
    let slow0 = locate_trough(&start, X_SLOW - shift_slow, 2.0).unwrap();
    let fast1 = locate_trough(&end, fast0 + 4.0 * K_FAST * K_FAST * t_end + shift_fast, 2.0).unwrap();
    let slow1 = locate_trough(&end, slow0 + 4.0 * K_SLOW * K_SLOW * t_end + shift_slow, 2.0).unwrap();

    let measured_fast = fast1 - fast0 - 4.0 * K_FAST * K_FAST * t_end;
    let measured_slow = slow1 - slow0 - 4.0 * K_SLOW * K_SLOW * t_end;
    assert!((measured_fast - shift_fast).abs() < 1e-4, "fast shift {measured_fast} vs {shift_fast}");
    assert!((measured_slow - shift_slow).abs() < 1e-4, "slow shift {measured_slow} vs {shift_slow}");

    let fast_shape = aligned_difference(&end, fast1, &start, fast0, 4.0);
    let slow_shape = aligned_difference(&end, slow1, &start, slow0, 6.0);
    assert!(fast_shape < 1e-4, "fast soliton shape changed by {fast_shape}");
    assert!(slow_shape < 1e-4, "slow soliton shape changed by {slow_shape}");

    let oracle = exact(t_end);
    assert!(end.distance(&oracle) < 1e-6, "deviation from exact solution {}", end.distance(&oracle));

    let c0 = conserved_integrals(&riccati_densities(&start, 5).unwrap());
    let c1 = conserved_integrals(&riccati_densities(&end, 5).unwrap());
    for (a, b) in c0.odd.iter().zip(&c1.odd) {
        assert!((a - b).abs() < 1e-6 * a.abs(), "{a} vs {b}");
    }
}
