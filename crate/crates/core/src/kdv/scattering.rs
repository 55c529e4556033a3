//! Scattering data of `−φ'' + uφ = k²φ` and the KdV action variables.
//!
//! The Jost solution is normalized on the left, `φ = e^{−ikx}` where `u` has
//! decayed. On the right `φ = a e^{−ikx} + b e^{ikx}`, so
//! `a = (ikφ − φ') e^{ikx} / (2ik)`. Writing `φ = ψ e^{−ikx}` removes the
//! oscillation: `ψ'' = 2ikψ' + uψ`, `ψ = 1, ψ' = 0` on the left and
//! `a = ψ − ψ'/(2ik)` on the right. For `k = iκ` the system is real, which is
//! what the bound-state search brackets.
//!
//! With this normalization `a → 1` as `|k| → ∞`, `|a| ≥ 1` on the real axis,
//! `a(iκ_l) = 0` at bound states, and the dispersion relation for `ln a`
//! matched against the Riccati expansion gives
//! `H = −(32/5) Σ κ_l⁵ + (32/π) ∫₀^∞ k⁴ ln|a| dk` for `H = ∫(½u_x² + u³)`,
//! which is the action form with `n(k) = (2k/π) ln|a|²` and `N_l = κ_l²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;

use super::ode::{self, Tolerances};
use super::PeriodicField;
use crate::spectral::PeriodicGrid;
use crate::{Error, Result};

pub const DEFAULT_SCATTERING_DECAY_TOL: f64 = 1e-8;
/// Tolerated contribution of the top tenth of the sampled `k` range to the
/// continuous part of the action Hamiltonian.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
const UPSAMPLE: usize = 32;

/// A potential on a finite window `[left, right]` outside of which it is
/// taken to vanish.
#[derive(Clone)]
pub struct LinePotential {
    left: f64,
    right: f64,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for LinePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinePotential").field("left", &self.left).field("right", &self.right).finish()
    }
}

impl LinePotential {
    pub fn from_fn(
        left: f64,
        right: f64,
        decay_tol: f64,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::InvalidArgument(format!("bad window [{left}, {right}]")));
        }
        let (ul, ur) = (u(left), u(right));
        if !(ul.abs() < decay_tol && ur.abs() < decay_tol) {
            return Err(Error::Precondition(format!(
                "potential has not decayed at the window edges: u({left}) = {ul:e}, u({right}) = {ur:e}, tolerance {decay_tol:e}"
            )));
        }
        Ok(Self { left, right, eval: Arc::new(u) })
    }

    /// One period of `f`, cut where `|u|` is smallest, evaluated by
    /// band-limited upsampling and cubic Hermite interpolation.
    pub fn from_periodic(f: &PeriodicField, decay_tol: f64) -> Result<Self> {
        let n = f.len();
        let start = (0..n).min_by(|&a, &b| f.u()[a].abs().total_cmp(&f.u()[b].abs())).unwrap_or(0);
        let coarse = f.spectral();
        let hat = coarse.forward(f.u());
        let fine_n = n * UPSAMPLE;
        let fine = PeriodicGrid::new(fine_n, f.period());
        let mut padded = vec![Complex64::new(0.0, 0.0); fine_n];
        let scale = UPSAMPLE as f64;
        for (j, &c) in hat.iter().enumerate() {
            if coarse.is_nyquist(j) {
                padded[j] += 0.5 * c * scale;
                padded[fine_n - j] += 0.5 * c * scale;
            } else if j < n / 2 {
                padded[j] = c * scale;
            } else {
                padded[fine_n - (n - j)] = c * scale;
            }
        }
        let values = fine.inverse(&padded);
        let slopes = fine.inverse(&fine.derivative_hat(&padded, 1));
        let h = fine.spacing();
        let period = f.period();
        let left = start as f64 * f.spacing();
        let eval = move |x: f64| {
            let s = x.rem_euclid(period) / h;
            let i = (s.floor() as usize).min(fine_n - 1);
            let t = s - i as f64;
            let j = (i + 1) % fine_n;
            let (t2, t3) = (t * t, t * t * t);
            values[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
                + slopes[i] * h * (t3 - 2.0 * t2 + t)
                + values[j] * (3.0 * t2 - 2.0 * t3)
                + slopes[j] * h * (t3 - t2)
        };
        Self::from_fn(left, left + period, decay_tol, eval)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.left, self.right)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JostOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 2_000_000 }
    }
}

pub fn schrodinger_a(pot: &LinePotential, k: Complex64) -> Result<Complex64> {
    schrodinger_a_with(pot, k, &JostOptions::default())
}

pub fn schrodinger_a_with(pot: &LinePotential, k: Complex64, opts: &JostOptions) -> Result<Complex64> {
    if !(k.re.is_finite() && k.im.is_finite()) || k.im < 0.0 {
        return Err(Error::InvalidArgument(format!("need finite k with Im k >= 0, got {k}")));
    }
    if k.norm() == 0.0 {
        return Err(Error::InvalidArgument("a(k) is undefined at k = 0".into()));
    }
    let two_ik = Complex64::new(0.0, 2.0) * k;
    let rhs = |x: f64, y: &ode::State| [y[1], two_ik * y[1] + pot.value(x) * y[0]];
    let tol = Tolerances { rtol: opts.rtol, atol: opts.atol, max_steps: opts.max_steps };
    let start = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let [psi, dpsi] = ode::integrate(rhs, pot.left, pot.right, start, tol)?;
    Ok(psi - dpsi / two_ik)
}

/// `a(iκ)`, real for real potentials.
fn a_imaginary(pot: &LinePotential, kappa: f64, opts: &JostOptions) -> Result<f64> {
    Ok(schrodinger_a_with(pot, Complex64::new(0.0, kappa), opts)?.re)
}

fn bisect(pot: &LinePotential, opts: &JostOptions, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > 1e-10 * hi.max(1.0) * 0.5 {
        let mid = 0.5 * (lo + hi);
        let fm = a_imaginary(pot, mid, opts)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `κ_l ∈ (0, k_max]` with `a(iκ_l) = 0`, in increasing order.
pub fn bound_states(pot: &LinePotential, k_max: f64) -> Result<Vec<f64>> {
    bound_states_with(pot, k_max, 256, &JostOptions::default())
}

pub fn bound_states_with(pot: &LinePotential, k_max: f64, scan: usize, opts: &JostOptions) -> Result<Vec<f64>> {
    if !(k_max.is_finite() && k_max > 0.0) || scan < 2 {
        return Err(Error::InvalidArgument(format!("need k_max > 0 and scan >= 2, got {k_max}, {scan}")));
    }
    let step = k_max / scan as f64;
    let samples: Vec<(f64, f64)> = (1..=scan)
        .map(|j| {
            let kappa = j as f64 * step;
            a_imaginary(pot, kappa, opts).map(|a| (kappa, a))
        })
        .collect::<Result<_>>()?;
    let mut roots: Vec<f64> = Vec::new();
    for w in samples.windows(2) {
        let ((k0, f0), (k1, f1)) = (w[0], w[1]);
        if f0 == 0.0 {
            roots.push(k0);
            continue;
        }
        if (f0 < 0.0) == (f1 < 0.0) || f1 == 0.0 {
            continue;
        }
        let mut root = bisect(pot, opts, k0, k1, f0)?;
        let at_edge = (root - k0).abs() < 1e-9 || (root - k1).abs() < 1e-9;
        if at_edge {
            // retry on a bracket widened by half a scan step each side
            let (lo, hi) = ((root - 0.5 * step).max(0.5 * step), (root + 0.5 * step).min(k_max + 0.5 * step));
            let (flo, fhi) = (a_imaginary(pot, lo, opts)?, a_imaginary(pot, hi, opts)?);
            if (flo < 0.0) == (fhi < 0.0) {
                return Err(Error::Bracket(format!(
                    "sign change near κ = {root} does not persist on a widened bracket"
                )));
            }
            root = bisect(pot, opts, lo, hi, flo)?;
        }
        roots.push(root);
    }
    if let Some(&(k, f)) = samples.last() {
        if f == 0.0 {
            roots.push(k);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub k_grid: Vec<f64>,
    pub a: Vec<Complex64>,
    pub bound_k: Vec<f64>,
}

impl ScatteringData {
    /// `max(0, 1 − min_k |a(k)|)`; zero when `|a| ≥ 1` holds on every sample.
    pub fn unitarity_defect(&self) -> f64 {
        let min = self.a.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
        (1.0 - min).max(0.0)
    }

    /// `|a(k_last) − 1|`.
    pub fn asymptotic_defect(&self) -> f64 {
        self.a.last().map_or(0.0, |a| (a - 1.0).norm())
    }
}

/// `k_j = j·k_max/n`, `j = 1..=n`.
pub fn uniform_k_grid(k_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|j| j as f64 * k_max / n as f64).collect()
}

pub fn scattering_data(
    pot: &LinePotential,
    k_grid: &[f64],
    bound_k_max: f64,
    opts: &JostOptions,
) -> Result<ScatteringData> {
    if let Some(k) = k_grid.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::InvalidArgument(format!("real wavenumbers must be positive, got {k}")));
    }
    let a =
        k_grid.iter().map(|&k| schrodinger_a_with(pot, Complex64::new(k, 0.0), opts)).collect::<Result<Vec<_>>>()?;
    let bound_k = bound_states_with(pot, bound_k_max, 256, opts)?;
    Ok(ScatteringData { k_grid: k_grid.to_vec(), a, bound_k })
}

#[derive(Debug, Clone)]
pub struct ActionSpectrum {
    pub k_grid: Vec<f64>,
    /// `n(k) = (2k/π) ln|a(k)|²`.
    pub n_of_k: Vec<f64>,
    /// `N_l = κ_l²`.
    pub bound_n: Vec<f64>,
}

pub fn action_spectrum(s: &ScatteringData) -> ActionSpectrum {
    let n_of_k = s.k_grid.iter().zip(&s.a).map(|(&k, a)| 2.0 * k / PI * a.norm_sqr().ln()).collect();
    ActionSpectrum { k_grid: s.k_grid.clone(), n_of_k, bound_n: s.bound_k.iter().map(|k| k * k).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionHamiltonian {
    pub total: f64,
    /// `−(32/5) Σ N_l^{5/2}`.
    pub discrete: f64,
    /// `8 ∫ k³ n(k) dk` over the sampled range.
    pub continuous: f64,
    /// Part of `continuous` from the top tenth of the sampled range.
    pub tail: f64,
}

fn is_uniform_from_zero(k: &[f64]) -> bool {
    let dk = k[0];
    k.iter().enumerate().all(|(j, &kj)| (kj - (j + 1) as f64 * dk).abs() <= 1e-12 * kj.max(1.0))
}

/// `∫₀^{k_n} g` from samples `g(k_j)` with `g(0) = 0` implied.
fn quadrature(k: &[f64], g: &[f64]) -> f64 {
    let mut x = vec![0.0];
    x.extend_from_slice(k);
    let mut y = vec![0.0];
    y.extend_from_slice(g);
    let intervals = x.len() - 1;
    if is_uniform_from_zero(k) && intervals >= 2 {
        let h = k[0];
        let simpson =
            |a: usize, b: usize| (a..b).step_by(2).map(|i| h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2])).sum::<f64>();
        if intervals % 2 == 0 {
            return simpson(0, intervals);
        }
        if intervals >= 3 {
            let m = intervals - 3;
            let tail = 3.0 * h / 8.0 * (y[m] + 3.0 * y[m + 1] + 3.0 * y[m + 2] + y[m + 3]);
            return simpson(0, m) + tail;
        }
    }
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

pub fn hamiltonian_from_actions(a: &ActionSpectrum) -> ActionHamiltonian {
    hamiltonian_from_actions_with(a, DEFAULT_TAIL_TOL)
}

pub fn hamiltonian_from_actions_with(a: &ActionSpectrum, tail_tol: f64) -> ActionHamiltonian {
    let discrete = -32.0 / 5.0 * a.bound_n.iter().map(|n| n.powf(2.5)).sum::<f64>();
    if a.k_grid.is_empty() {
        return ActionHamiltonian { total: discrete, discrete, continuous: 0.0, tail: 0.0 };
    }
    let g: Vec<f64> = a.k_grid.iter().zip(&a.n_of_k).map(|(k, n)| 8.0 * k * k * k * n).collect();
    let continuous = quadrature(&a.k_grid, &g);
    let k_last = *a.k_grid.last().unwrap();
    let from = a.k_grid.iter().position(|&k| k >= 0.9 * k_last).unwrap_or(0);
    let tail: f64 = a.k_grid[from..]
        .windows(2)
        .zip(g[from..].windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum();
    let total = discrete + continuous;
    if tail.abs() > tail_tol * total.abs().max(1.0) {
        warn!("unconverged k-tail: top tenth of the sampled range contributes {tail:e} to H = {total}");
    }
    ActionHamiltonian { total, discrete, continuous, tail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdv::soliton_field;

    fn sech2_well(depth: f64) -> LinePotential {
        LinePotential::from_fn(-20.0, 20.0, 1e-8, move |x| -depth / x.cosh().powi(2)).unwrap()
    }

    #[test]
    fn free_jost_solution() {
        let pot = LinePotential::from_fn(-5.0, 5.0, 1e-8, |_| 0.0).unwrap();
        for k in [0.3, 1.0, 7.0] {
            assert!((schrodinger_a(&pot, Complex64::new(k, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        }
        assert!(bound_states(&pot, 3.0).unwrap().is_empty());
    }

    #[test]
    fn reflectionless_well_matches_closed_form() {
        let pot = sech2_well(2.0);
        let i = Complex64::i();
        for k in [0.2, 1.0, 1.3, 4.0] {
            let k = Complex64::new(k, 0.0);
            let exact = (k - i) / (k + i);
            assert!((schrodinger_a(&pot, k).unwrap() - exact).norm() < 1e-8, "k = {k}");
        }
        // Jost solution oracle in the upper half plane
        let k = Complex64::new(0.7, 0.4);
        assert!((schrodinger_a(&pot, k).unwrap() - (k - i) / (k + i)).norm() < 1e-8);
    }

    #[test]
    fn single_bound_state_of_reflectionless_well() {
        let roots = bound_states(&sech2_well(2.0), 3.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-8, "{roots:?}");
    }

    #[test]
    fn partially_reflecting_well() {
        // u = −ν(ν+1) sech²x: |a|² = 1 + cos²(π(ν+½)) / sinh²(πk), κ = ν.
        let depth = 1.5f64;
        let nu_half = (depth + 0.25).sqrt();
        let pot = sech2_well(depth);
        let k = uniform_k_grid(8.0, 400);
        let s = scattering_data(&pot, &k, 3.0, &JostOptions::default()).unwrap();
        assert!(s.unitarity_defect() < 1e-8);
        let spec = action_spectrum(&s);
        for (&kj, &n) in k.iter().zip(&spec.n_of_k).step_by(37) {
            let exact = 2.0 * kj / PI * (1.0 + (PI * nu_half).cos().powi(2) / (PI * kj).sinh().powi(2)).ln();
            assert!((n - exact).abs() < 1e-8 * exact.max(1.0), "k = {kj}: {n} vs {exact}");
        }
        assert_eq!(s.bound_k.len(), 1);
        assert!((s.bound_k[0] - (nu_half - 0.5)).abs() < 1e-8);
        // ∫(½u_x² + u³) = 8A²/15 − 16A³/15 for u = −A sech²x
        let direct = 8.0 * depth * depth / 15.0 - 16.0 * depth.powi(3) / 15.0;
        let h = hamiltonian_from_actions(&spec);
        assert!(h.continuous > 0.0);
        assert!((h.total - direct).abs() < 1e-6 * direct.abs(), "{h:?} vs {direct}");
    }

    #[test]
    fn window_from_periodic_field() {
        let f = soliton_field(1.0, 11.0, 40.0, 512).unwrap();
        let pot = LinePotential::from_periodic(&f, 1e-8).unwrap();
        let k = Complex64::new(1.3, 0.0);
        let i = Complex64::i();
        assert!((schrodinger_a(&pot, k).unwrap() - (k - i) / (k + i)).norm() < 1e-8);
        let roots = bound_states(&pot, 2.0).unwrap();
        assert!(roots.len() == 1 && (roots[0] - 1.0).abs() < 1e-8, "{roots:?}");
    }

    #[test]
    fn non_decaying_potential_is_rejected() {
        assert!(matches!(LinePotential::from_fn(-1.0, 1.0, 1e-8, |_| 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_spectrum_gives_zero() {
        let a = ActionSpectrum { k_grid: vec![], n_of_k: vec![], bound_n: vec![] };
        assert_eq!(hamiltonian_from_actions(&a).total, 0.0);
    }

    #[test]
    fn quadrature_is_exact_on_cubics() {
        for n in [6, 7] {
            let k = uniform_k_grid(2.0, n);
            let g: Vec<f64> = k.iter().map(|k| k * k * k).collect();
            assert!((quadrature(&k, &g) - 4.0).abs() < 1e-13);
        }
    }
}
