use crate::canonical::CompletenessReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("observable `{observable}` evaluated to a non-finite value")]
    Evaluation { observable: String },

    /// The momentum Jacobian lost rank where it had to be inverted.
    #[error(
        "momentum Jacobian is not invertible (rank {} of {})",
        .0.numerical_rank,
        .0.dim
    )]
    Incomplete(Box<CompletenessReport>),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("implicit solve failed: {0}")]
    Convergence(String),

    #[error("{modes} modes cannot be resolved on a grid of {intervals} intervals")]
    Resolution { modes: usize, intervals: usize },

    #[error("outside the classically allowed region: {0}")]
    Domain(String),

    #[error("time step {dt} exceeds the remaining domain margin {margin}")]
    DomainExit { dt: f64, margin: f64 },

    #[error("moment overflow: {0}; nondimensionalize the grid")]
    Scaling(String),

    #[error("invalid integral values: {0}")]
    InvalidIntegrals(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("solution blew up; last stable time {last_stable_time}")]
    BlowUp { last_stable_time: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("step size underflow: {0}")]
    StepSize(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
