use pdflow_core::certify::CertifyError;
use pdflow_core::distgraph::GraphError;
use pdflow_core::dynamics::DynamicsError;
use pdflow_core::problem::ProblemError;

/// Error carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration, flags or output location (exit 2).
    Config(String),
    /// The integrated flow diverged or stalled (exit 3).
    Divergence(String),
    /// No rate could be certified (exit 4).
    NotCertifiable(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::NotCertifiable(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Divergence(m) => write!(f, "divergence: {m}"),
            CliError::NotCertifiable(m) => write!(f, "not certifiable: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Disconnected { lambda2 } => CliError::Config(format!(
                "communication graph is disconnected (second Laplacian eigenvalue {lambda2:.3e}); \
                 a connected undirected graph is required"
            )),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Diverged { .. }
            | DynamicsError::NonFiniteGradient { .. }
            | DynamicsError::NoConvergence { .. } => CliError::Divergence(e.to_string()),
            DynamicsError::Graph(g) => g.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<CertifyError> for CliError {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::NotHurwitz { .. }
            | CertifyError::NotCertifiable { .. }
            | CertifyError::Linalg(_) => CliError::NotCertifiable(e.to_string()),
            CertifyError::Dynamics(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
