//! Augmented primal-dual gradient flows for equality-constrained and
//! distributed optimization, with frequency-domain certificates of their
//! exponential convergence rate.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense real/complex linear algebra (QR, eigenvalues, solves).
//! * [`problem`]: objectives, constraints, instances and sampling audits.
//! * [`dynamics`]: RK4 integration of the flows, trajectories, rate fits.
//! * [`certify`]: error systems, Hurwitz checks, KYP-based rate certificates.
//! * [`distgraph`]: graphs, Laplacian transforms and the consensus embedding.

pub mod certify;
pub mod distgraph;
pub mod dynamics;
pub mod linalg;
pub mod problem;

pub use certify::{certify_rate, CertifyError, ErrorSystem, Frame, FrequencyGrid, RateCertificate};
pub use distgraph::{DistributedProblem, Graph, GraphError};
pub use dynamics::{
    integrate, DynamicsError, Flow, FlowKind, IntegrateOptions, RateFit, Trajectory,
};
pub use linalg::{ComplexMatrix, DenseMatrix, LinalgError, QrFactors};
pub use problem::{EqualityConstraint, ObjectiveOracle, ProblemError, ProblemInstance, Solution};
