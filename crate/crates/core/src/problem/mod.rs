//! Problem instances: objective oracles, linear equality constraints and
//! sampling audits of the declared smoothness/convexity constants.

mod audit;
mod constraint;
mod instance;
mod library;
mod objective;

pub use audit::{
    estimate_rsi_mu, estimate_smoothness, gradient_check, SampleBox, SmoothnessEstimate,
};
pub use constraint::EqualityConstraint;
pub use instance::{
    kkt_residual, transformed_oracle, PartitionSpec, ProblemDoc, ProblemInstance, Solution,
};
pub use library::{builtin_library, library_instance, rsi_demo_oracle, LIBRARY_NAMES, RSI_DEMO_MU};
pub use objective::{ConvexityClass, Differentiable, Function, ObjectiveOracle};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(
        "declared constant violated: quotient {quotient:.6e} exceeds declared l = {declared:.6e} \
         at x = {x:?}, y = {y:?}"
    )]
    DeclarationViolated {
        x: Vec<f64>,
        y: Vec<f64>,
        quotient: f64,
        declared: f64,
    },
    #[error("known solution has KKT residual {residual:.3e}")]
    KktViolated { residual: f64 },
    #[error("unknown library instance `{0}`")]
    UnknownInstance(String),
}

pub type Result<T> = std::result::Result<T, ProblemError>;
