use super::{
    ConvexityClass, EqualityConstraint, Function, ObjectiveOracle, ProblemError, ProblemInstance,
    Result, Solution,
};
use crate::linalg::DenseMatrix;

/// Restricted-secant modulus shipped for `x² + 3 sin²x`.
///
/// The secant quotient `f′(x)/x = 2 + 3 sin(2x)/x` has grid minimum
/// `0.696598…` (near `x ≈ ±2.2467`) over 2·10⁶ points of `[−10, 10]`; beyond
/// that interval it only grows toward 2. This is the largest two-decimal
/// value below the minimum.
pub const RSI_DEMO_MU: f64 = 0.69;

pub const LIBRARY_NAMES: [&str; 5] = [
    "strongly_convex_quadratic",
    "partially_strongly_convex",
    "zero_objective_square",
    "affine_square",
    "rsi_consensus",
];

/// Scalar `x² + 3 sin²x`: nonconvex (`f″ ∈ [−4, 8]`), unique minimizer 0.
pub fn rsi_demo_oracle() -> ObjectiveOracle {
    let f = Function::Sum {
        terms: vec![
            Function::Quadratic {
                h: DenseMatrix::from_diag(&[2.0]),
                c: None,
            },
            Function::SinSquared { n: 1, weight: 3.0 },
        ],
    };
    ObjectiveOracle::new(f, 8.0, RSI_DEMO_MU, ConvexityClass::Rsi).expect("static oracle")
}

fn mat(rows: &[&[f64]]) -> DenseMatrix {
    DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        .expect("static matrix")
}

#[allow(clippy::too_many_arguments)]
fn build(
    name: &str,
    f: Function,
    l: f64,
    mu: f64,
    class: ConvexityClass,
    t: DenseMatrix,
    b: Vec<f64>,
    solution: (Vec<f64>, Vec<f64>),
) -> ProblemInstance {
    let o = ObjectiveOracle::new(f, l, mu, class).expect("static oracle");
    let c = EqualityConstraint::new(t, b).expect("static constraint");
    let sol = Solution {
        x: solution.0,
        lambda: solution.1,
    };
    ProblemInstance::new(name, o, c, 1.0, Some(sol)).expect("static instance")
}

/// The shipped demonstration instances, all with `α = 1`.
pub fn builtin_library() -> Vec<ProblemInstance> {
    vec![
        // ½‖x‖² on x₁ + x₂ = 1
        build(
            LIBRARY_NAMES[0],
            Function::Quadratic {
                h: DenseMatrix::identity(2),
                c: None,
            },
            1.0,
            1.0,
            ConvexityClass::PartiallyStronglyConvex,
            mat(&[&[1.0, 1.0]]),
            vec![1.0],
            (vec![0.5, 0.5], vec![-0.5]),
        ),
        // ½x₂² + x₁ on x₁ = 1: linear along range(Tᵀ), strongly convex along null(T)
        build(
            LIBRARY_NAMES[1],
            Function::Quadratic {
                h: DenseMatrix::from_diag(&[0.0, 1.0]),
                c: Some(vec![1.0, 0.0]),
            },
            1.0,
            1.0,
            ConvexityClass::PartiallyStronglyConvex,
            mat(&[&[1.0, 0.0]]),
            vec![1.0],
            (vec![1.0, 0.0], vec![-1.0]),
        ),
        // f ≡ 0, T = I₂
        build(
            LIBRARY_NAMES[2],
            Function::Zero { n: 2 },
            1.0,
            0.0,
            ConvexityClass::Convex,
            DenseMatrix::identity(2),
            vec![1.0, 2.0],
            (vec![1.0, 2.0], vec![0.0, 0.0]),
        ),
        // x₁ − x₂ on diag(1, 2) x = (1, 2): x* = (1, 1), λ* = −T⁻ᵀc = (−1, ½)
        build(
            LIBRARY_NAMES[3],
            Function::Affine {
                c: vec![1.0, -1.0],
                offset: 0.0,
            },
            1.0,
            0.0,
            ConvexityClass::Convex,
            DenseMatrix::from_diag(&[1.0, 2.0]),
            vec![1.0, 2.0],
            (vec![1.0, 1.0], vec![-1.0, 0.5]),
        ),
        // x₁² + 3 sin²x₂ on x₁ = x₂. Along the consensus line x = s(1,1)/√2 the
        // restriction is (x² + 3sin²x)(s/√2), whose secant modulus in s is μ/2.
        build(
            LIBRARY_NAMES[4],
            Function::Stacked {
                blocks: vec![
                    Function::Quadratic {
                        h: DenseMatrix::from_diag(&[2.0]),
                        c: None,
                    },
                    Function::SinSquared { n: 1, weight: 3.0 },
                ],
            },
            6.0,
            RSI_DEMO_MU / 2.0,
            ConvexityClass::Rsi,
            mat(&[&[1.0, -1.0]]),
            vec![0.0],
            (vec![0.0, 0.0], vec![0.0]),
        ),
    ]
}

pub fn library_instance(name: &str) -> Result<ProblemInstance> {
    builtin_library()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ProblemError::UnknownInstance(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{
        estimate_rsi_mu, estimate_smoothness, gradient_check, kkt_residual, SampleBox,
    };

    #[test]
    fn known_solutions_satisfy_kkt() {
        for p in builtin_library() {
            let s = p.known_solution.as_ref().unwrap();
            assert!(kkt_residual(&p, &s.x, &s.lambda) <= 1e-8, "{}", p.name);
        }
    }

    #[test]
    fn declared_constants_survive_audit() {
        for (i, p) in builtin_library().iter().enumerate() {
            estimate_smoothness(&p.objective, 1000, SampleBox::default(), i as u64).unwrap();
            assert!(
                gradient_check(&p.objective, 20, SampleBox::default(), 9) < 1e-5,
                "{}",
                p.name
            );
        }
    }

    #[test]
    fn rsi_oracle_on_dense_grid() {
        let o = rsi_demo_oracle();
        let est = estimate_smoothness(&o, 1000, SampleBox::default(), 5).unwrap();
        assert!(est.l_hat <= 8.0);
        assert!(
            est.mu_hat < 0.0,
            "nonconvex: some secant quotient is negative"
        );
        let grid = (0..10_000).map(|i| vec![-10.0 + 20.0 * i as f64 / 9_999.0]);
        let mu = estimate_rsi_mu(&o, &[0.0], grid);
        assert!(mu >= RSI_DEMO_MU, "{mu}");
        assert!(mu < 0.7);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            library_instance("nope"),
            Err(ProblemError::UnknownInstance(_))
        ));
        assert_eq!(library_instance("affine_square").unwrap().m(), 2);
    }
}
