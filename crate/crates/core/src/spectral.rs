//! FFT plumbing for uniform periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct PeriodicGrid {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).field("period", &self.period).finish()
    }
}

impl PeriodicGrid {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let base = 2.0 * PI / period;
        let wavenumbers =
            (0..n).map(|j| if j <= n / 2 { j as f64 * base } else { (j as f64 - n as f64) * base }).collect();
        Self { n, period, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), wavenumbers }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Angular wavenumber of each FFT bin. The Nyquist bin carries `+π/dx`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        self.n % 2 == 0 && j == self.n / 2
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn inverse_complex(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let mut buf = hat.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse(&self, hat: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(hat).into_iter().map(|z| z.re).collect()
    }

    /// Spectral `order`-th derivative of a real grid function. The Nyquist
    /// mode is dropped for odd orders so the result stays real.
    pub fn derivative(&self, u: &[f64], order: u32) -> Vec<f64> {
        let hat = self.forward(u);
        self.inverse(&self.derivative_hat(&hat, order))
    }

    pub fn derivative_hat(&self, hat: &[Complex64], order: u32) -> Vec<Complex64> {
        let i = Complex64::i();
        hat.iter()
            .enumerate()
            .map(|(j, &c)| {
                if order % 2 == 1 && self.is_nyquist(j) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * (i * self.wavenumbers[j]).powu(order)
                }
            })
            .collect()
    }

    /// Periodic trapezoid rule, `dx · Σ u_j`.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.spacing() * u.iter().sum::<f64>()
    }
}

/// Band-limited trigonometric interpolant of a real periodic grid function
/// sampled at `origin + j·dx`.
#[derive(Debug, Clone)]
pub(crate) struct TrigInterpolant {
    origin: f64,
    base: f64,
    /// `c_0, c_1, …, c_{n/2}` scaled so that `u(x) = Re Σ w_j c_j e^{i j κ (x − origin)}`.
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(grid: &PeriodicGrid, origin: f64, u: &[f64]) -> Self {
        let n = grid.len();
        let hat = grid.forward(u);
        let coeffs = (0..=n / 2)
            .map(|j| {
                let w = if j == 0 || grid.is_nyquist(j) { 1.0 } else { 2.0 };
                hat[j] * (w / n as f64)
            })
            .collect();
        Self { origin, base: 2.0 * PI / grid.period(), coeffs }
    }

    pub fn value(&self, x: f64) -> f64 {
        let theta = self.base * (x - self.origin);
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut sum = 0.0;
        for c in &self.coeffs {
            sum += (c * rot).re;
            rot *= step;
        }
        sum
    }
}
