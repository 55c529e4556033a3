//! Numerical laboratory for first integrals of infinite-dimensional
//! Hamiltonian systems, studied on finite truncations.
//!
//! * [`canonical`]: truncated phase space, Poisson brackets, the momentum
//!   Jacobian completeness test, momentum recovery and symplectic stepping.
//! * [`string`]: the Dirichlet string on `[0, 2π]` in sine modes.
//! * [`line`]: the wave equation on a truncated line, odd moments and the
//!   `y`-series of the continuous mode energy.
//! * [`kdv`]: pseudospectral KdV, Riccati conserved densities, Jost
//!   scattering data and action variables.
//! * [`csvio`]: the CSV schemas shared by the experiment runner.

pub mod canonical;
pub mod csvio;
pub mod error;
pub mod kdv;
pub mod line;
mod spectral;
pub mod string;

pub use error::{Error, Result};
