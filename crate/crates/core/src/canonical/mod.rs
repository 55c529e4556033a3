//! Truncated canonical phase space.
//!
//! Hamilton's equations `dq/dt = ∂H/∂p`, `dp/dt = −∂H/∂q` on `N` pairs,
//! numerical Poisson brackets, and the completeness test: a family of first
//! integrals whose momentum Jacobian `∂f_i/∂p_j` is invertible determines the
//! momenta from the integral values.

mod bracket;
mod completeness;
mod hamiltonian;
mod observable;
mod state;

pub use bracket::{
    analytic_poisson_bracket, completeness_jacobian, fd_gradient, fd_partial_p, fd_partial_q, involution_matrix,
    poisson_bracket, DEFAULT_FD_STEP,
};
pub use completeness::{
    completeness_report, recover_momenta, CompletenessReport, MomentumRecovery, NewtonOptions, DEFAULT_RANK_TOL,
};
pub use hamiltonian::{
    conservation_drift, evolve, implicit_midpoint_step, symplectic_step, HamiltonianSystem, DEFAULT_DRIFT_FLOOR,
};
pub use observable::{Observable, ObservableSet};
pub use state::{CanonicalState, Trajectory};
