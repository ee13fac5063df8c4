use super::{build_graph, DistributedProblem, GlobalCondition, GraphKind, Result};
use crate::linalg::DenseMatrix;
use crate::problem::{ConvexityClass, Function, ObjectiveOracle, RSI_DEMO_MU};

/// Penalty used by [`nonconvex_path_demo`]. With `α = 1` the matrix
/// `H + αL` is indefinite for this instance and the flow converges slowly;
/// `α = 2` makes it positive definite.
pub const NONCONVEX_DEMO_ALPHA: f64 = 2.0;

fn scalar_quadratic(h: f64, l: f64, mu: f64, class: ConvexityClass) -> ObjectiveOracle {
    ObjectiveOracle::new(
        Function::Quadratic {
            h: DenseMatrix::from_diag(&[h]),
            c: None,
        },
        l,
        mu,
        class,
    )
    .expect("constants are valid")
}

/// Three agents on a path with `f₁ = −½x²`, `f₂ = f₃ = x²`. The sum `1.5x²`
/// is 3-strongly convex although `f₁` is concave.
pub fn nonconvex_path_demo() -> Result<DistributedProblem> {
    let agents = vec![
        scalar_quadratic(-1.0, 1.0, 0.0, ConvexityClass::Custom),
        scalar_quadratic(2.0, 2.0, 2.0, ConvexityClass::Convex),
        scalar_quadratic(2.0, 2.0, 2.0, ConvexityClass::Convex),
    ];
    DistributedProblem::new(
        agents,
        build_graph(GraphKind::Path, 3, 0)?,
        NONCONVEX_DEMO_ALPHA,
        GlobalCondition::StronglyConvex { mu: 3.0 },
    )
}

/// Two agents splitting `x² + 3sin²x` as `f₁ = x²`, `f₂ = 3sin²x`. The sum
/// is nonconvex but satisfies the restricted secant inequality around 0.
pub fn rsi_split_demo() -> Result<DistributedProblem> {
    let f2 = ObjectiveOracle::new(
        Function::SinSquared { n: 1, weight: 3.0 },
        6.0,
        0.0,
        ConvexityClass::Custom,
    )
    .expect("constants are valid");
    let agents = vec![scalar_quadratic(2.0, 2.0, 2.0, ConvexityClass::Convex), f2];
    DistributedProblem::new(
        agents,
        build_graph(GraphKind::Path, 2, 0)?,
        1.0,
        GlobalCondition::Rsi {
            mu: RSI_DEMO_MU,
            minimizer: vec![0.0],
        },
    )
}
