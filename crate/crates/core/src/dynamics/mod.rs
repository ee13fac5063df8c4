//! Numerical integration of the primal-dual flows, trajectory recording,
//! exponential rate fits and equilibrium computation.

mod equilibrium;
mod flow;
mod ode;
mod rate;
mod trajectory;

pub use equilibrium::{distributed_equilibrium, equilibrium_solve, EQUILIBRIUM_TOL};
pub use flow::{integrate, Flow, FlowKind};
pub use ode::{integrate_field, IntegrateOptions, StepControl, DEFAULT_STEP, DIVERGENCE_BOUND};
pub use rate::{fit_rate, RateFit, DEFAULT_WINDOW_FRACTION, FIT_NOISE_FLOOR};
pub use trajectory::{format_sig17, Trajectory};

use thiserror::Error;

use crate::distgraph::GraphError;
use crate::linalg::LinalgError;
use crate::problem::ProblemError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("trajectory diverged at t = {t:.6}: ‖z‖ = {norm:.3e}")]
    Diverged { t: f64, norm: f64 },
    #[error("gradient became non-finite at t = {t:.6}")]
    NonFiniteGradient { t: f64 },
    #[error("invalid option `{0}`: {1}")]
    InvalidOption(&'static str, String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("trajectory has no reference equilibrium")]
    NoReference,
    #[error("error norm {initial:.3e} at window start is already below 1e-12")]
    InsufficientDecay { initial: f64 },
    #[error("rate fit needs at least 10 samples above the noise floor, got {count}")]
    InsufficientSamples { count: usize },
    #[error("equilibrium search stalled with KKT residual {residual:.3e}")]
    NoConvergence { residual: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;
