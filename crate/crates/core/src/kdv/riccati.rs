//! Conserved densities from the large-`k` expansion of the Riccati variable.
//!
//! `χ` with `ln a(k) = ∫ χ dx` solves `χ_x + χ² − u − 2ikχ = 0`. Inserting
//! `χ = Σ_{m≥1} χ_m/(2ik)^m` and collecting powers of `1/(2ik)`:
//!
//! * order zero: `−χ_1 − u = 0`, so `χ_1 = −u`;
//! * order `m ≥ 1`: `χ_{m+1} = ∂χ_m + Σ_{j=1}^{m−1} χ_j χ_{m−j}`.
//!
//! Unrolled: `χ_2 = −u_x`, `χ_3 = −u_xx + u²`, `χ_4 = ∂(−u_xx + 2u²)` and
//! `∫χ_5 = −∫(u_x² + 2u³)`, i.e. `I_3 = −2H` for `H = ∫(½u_x² + u³)`.
//! Even densities are exact derivatives of local expressions and integrate to
//! zero on a period.

use log::warn;
use num_complex::Complex64;

use super::PeriodicField;
use crate::spectral::PeriodicGrid;
use crate::{Error, Result};

/// Above this order the repeated spectral derivatives and products are
/// dominated by amplified round-off at the default resolution.
pub const RICCATI_NOISE_ORDER: usize = 8;

#[derive(Debug, Clone)]
pub struct RiccatiDensities {
    chi: Vec<Vec<f64>>,
    u: Vec<f64>,
    period: f64,
}

impl RiccatiDensities {
    pub fn order(&self) -> usize {
        self.chi.len()
    }

    /// `χ_m`, one-based.
    pub fn chi(&self, m: usize) -> &[f64] {
        &self.chi[m - 1]
    }

    fn grid(&self) -> PeriodicGrid {
        PeriodicGrid::new(self.u.len(), self.period)
    }
}

pub fn riccati_densities(f: &PeriodicField, order: usize) -> Result<RiccatiDensities> {
    if order == 0 {
        return Err(Error::InvalidArgument("Riccati order must be >= 1".into()));
    }
    if order > RICCATI_NOISE_ORDER {
        warn!("Riccati densities beyond order {RICCATI_NOISE_ORDER} are dominated by amplified round-off");
    }
    let grid = f.spectral();
    let n = f.len();
    let mut chi: Vec<Vec<f64>> = vec![f.u().iter().map(|u| -u).collect()];
    for m in 1..order {
        let mut next = grid.derivative(&chi[m - 1], 1);
        for j in 1..m {
            let (a, b) = (&chi[j - 1], &chi[m - j - 1]);
            for i in 0..n {
                next[i] += a[i] * b[i];
            }
        }
        chi.push(next);
    }
    Ok(RiccatiDensities { chi, u: f.u().to_vec(), period: f.period() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservedIntegrals {
    /// `I_m = ∫χ_{2m−1}`, `m = 1, 2, …`.
    pub odd: Vec<f64>,
    /// `∫χ_{2m}`, expected to vanish.
    pub even: Vec<f64>,
}

pub fn conserved_integrals(d: &RiccatiDensities) -> ConservedIntegrals {
    let grid = d.grid();
    let integrals: Vec<f64> = d.chi.iter().map(|c| grid.integrate(c)).collect();
    ConservedIntegrals {
        odd: integrals.iter().step_by(2).copied().collect(),
        even: integrals.iter().skip(1).step_by(2).copied().collect(),
    }
}

/// `‖χ_x + χ² − u − 2ikχ‖₂` for the truncation `χ = Σ_{m≤order} χ_m/(2ik)^m`.
/// The surviving terms start at `χ_{order+1}/(2ik)^order`.
pub fn riccati_truncation_residual(f: &PeriodicField, order: usize, k: f64) -> Result<f64> {
    if !(k.is_finite() && k != 0.0) {
        return Err(Error::InvalidArgument(format!("wavenumber must be finite and nonzero, got {k}")));
    }
    let d = riccati_densities(f, order)?;
    let grid = d.grid();
    let n = f.len();
    let z = Complex64::new(0.0, 2.0 * k);
    let mut chi = vec![Complex64::new(0.0, 0.0); n];
    let mut power = Complex64::new(1.0, 0.0);
    for c in &d.chi {
        power /= z;
        for i in 0..n {
            chi[i] += c[i] * power;
        }
    }
    let re: Vec<f64> = chi.iter().map(|c| c.re).collect();
    let im: Vec<f64> = chi.iter().map(|c| c.im).collect();
    let (dre, dim) = (grid.derivative(&re, 1), grid.derivative(&im, 1));
    let density: Vec<f64> = (0..n)
        .map(|i| {
            let r = Complex64::new(dre[i], dim[i]) + chi[i] * chi[i] - d.u[i] - z * chi[i];
            r.norm_sqr()
        })
        .collect();
    Ok(grid.integrate(&density).sqrt())
}

/// Empirical decay exponent `p` in `residual ∝ |k|^{−p}` from two wavenumbers.
pub fn truncation_exponent(f: &PeriodicField, order: usize, k1: f64, k2: f64) -> Result<f64> {
    let r1 = riccati_truncation_residual(f, order, k1)?;
    let r2 = riccati_truncation_residual(f, order, k2)?;
    Ok((r1 / r2).ln() / (k2 / k1).abs().ln())
}
