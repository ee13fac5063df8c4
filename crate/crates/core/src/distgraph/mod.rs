//! Communication graphs, Laplacian diagonalisation and the distributed
//! consensus problem `min Σᵢ fᵢ(xᵢ)` subject to `(L ⊗ Iₙ) x = 0`.

mod demo;
mod graph;
mod problem;

pub use demo::{nonconvex_path_demo, rsi_split_demo, NONCONVEX_DEMO_ALPHA};
pub use graph::{build_graph, laplacian_transform, Graph, GraphDoc, GraphKind, LaplacianTransform};
pub use problem::{consensus_error, embed_as_constrained, DistributedProblem, GlobalCondition};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::problem::ProblemError;

/// Smallest admissible second Laplacian eigenvalue for a connected graph.
pub const CONNECTIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error(
        "graph is not connected: second Laplacian eigenvalue {lambda2:.3e} <= {CONNECTIVITY_TOL:e}"
    )]
    Disconnected { lambda2: f64 },
    #[error("agents disagree on dimension: {0}")]
    AgentDimension(String),
    #[error("global objective audit failed: {0}")]
    AuditFailed(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub type Result<T> = std::result::Result<T, GraphError>;
