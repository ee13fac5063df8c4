use serde::{Deserialize, Serialize};

use super::{laplacian_transform, Graph, GraphError, LaplacianTransform, Result};
use crate::linalg::{norm2, DenseMatrix};
use crate::problem::{
    estimate_rsi_mu, estimate_smoothness, ConvexityClass, EqualityConstraint, Function,
    ObjectiveOracle, ProblemInstance, SampleBox,
};

/// Condition declared on the global objective `Σᵢ fᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum GlobalCondition {
    /// `Σᵢ fᵢ` is `μ`-strongly convex.
    StronglyConvex { mu: f64 },
    /// `Σᵢ fᵢ` satisfies the restricted secant inequality with modulus `μ`
    /// around its unique minimizer.
    Rsi { mu: f64, minimizer: Vec<f64> },
}

impl GlobalCondition {
    pub fn mu(&self) -> f64 {
        match self {
            GlobalCondition::StronglyConvex { mu } | GlobalCondition::Rsi { mu, .. } => *mu,
        }
    }
}

/// `N` agents with local objectives on `ℝⁿ` coupled through a graph.
#[derive(Debug, Clone)]
pub struct DistributedProblem {
    pub agents: Vec<ObjectiveOracle>,
    pub graph: Graph,
    pub transform: LaplacianTransform,
    pub alpha: f64,
    pub global: GlobalCondition,
    agent_dim: usize,
}

impl DistributedProblem {
    pub fn new(
        agents: Vec<ObjectiveOracle>,
        graph: Graph,
        alpha: f64,
        global: GlobalCondition,
    ) -> Result<Self> {
        if agents.len() != graph.n_nodes() {
            return Err(GraphError::AgentDimension(format!(
                "{} agents for a graph on {} nodes",
                agents.len(),
                graph.n_nodes()
            )));
        }
        let agent_dim = agents[0].dim();
        if agents.iter().any(|a| a.dim() != agent_dim) {
            return Err(GraphError::AgentDimension(
                "local objectives must share one dimension".into(),
            ));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(GraphError::AuditFailed(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if let GlobalCondition::Rsi { minimizer, .. } = &global {
            if minimizer.len() != agent_dim {
                return Err(GraphError::AgentDimension(
                    "RSI minimizer has wrong dimension".into(),
                ));
            }
        }
        let transform = laplacian_transform(&graph)?;
        Ok(Self {
            agents,
            graph,
            transform,
            alpha,
            global,
            agent_dim,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agent_dim(&self) -> usize {
        self.agent_dim
    }

    /// `N·n`.
    pub fn stacked_dim(&self) -> usize {
        self.n_agents() * self.agent_dim
    }

    /// `F(x) = Σᵢ fᵢ(xᵢ)` on the stacked space.
    pub fn stacked_function(&self) -> Function {
        Function::Stacked {
            blocks: self.agents.iter().map(|a| a.function.clone()).collect(),
        }
    }

    /// The global objective `Σᵢ fᵢ` on `ℝⁿ`, with declared `l = Σᵢ lᵢ`.
    pub fn sum_oracle(&self) -> ObjectiveOracle {
        let class = match self.global {
            GlobalCondition::StronglyConvex { .. } => ConvexityClass::PartiallyStronglyConvex,
            GlobalCondition::Rsi { .. } => ConvexityClass::Rsi,
        };
        ObjectiveOracle {
            function: Function::Sum {
                terms: self.agents.iter().map(|a| a.function.clone()).collect(),
            },
            declared_l: self.agents.iter().map(|a| a.declared_l).sum(),
            declared_mu: self.global.mu(),
            class,
        }
    }

    /// `𝑳 = L ⊗ Iₙ`.
    pub fn kron_laplacian(&self) -> DenseMatrix {
        self.transform
            .l
            .kron(&DenseMatrix::identity(self.agent_dim))
    }

    /// `𝐐 = Q ⊗ Iₙ`.
    pub fn kron_q(&self) -> DenseMatrix {
        self.transform
            .q
            .kron(&DenseMatrix::identity(self.agent_dim))
    }

    /// Average agent state `x̄`.
    pub fn mean_state(&self, x: &[f64]) -> Vec<f64> {
        let n = self.agent_dim;
        let mut mean = vec![0.0; n];
        for block in x.chunks(n) {
            mean.iter_mut().zip(block).for_each(|(m, v)| *m += v);
        }
        let inv = 1.0 / self.n_agents() as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        mean
    }

    /// `‖Σᵢ ∇fᵢ(x̄)‖` at the agents' average.
    pub fn gradient_sum_norm(&self, x: &[f64]) -> f64 {
        norm2(&self.sum_oracle().gradient(&self.mean_state(x)))
    }

    /// Samples the global objective and checks the declared condition.
    pub fn audit_global(&self, samples: usize, bounds: SampleBox, seed: u64) -> Result<f64> {
        let sum = self.sum_oracle();
        match &self.global {
            GlobalCondition::StronglyConvex { mu } => {
                let est = estimate_smoothness(&sum, samples, bounds, seed)?;
                if est.mu_hat < mu - 1e-9 {
                    return Err(GraphError::AuditFailed(format!(
                        "sampled strong convexity {:.6e} below declared {mu:.6e}",
                        est.mu_hat
                    )));
                }
                Ok(est.mu_hat)
            }
            GlobalCondition::Rsi { mu, minimizer } => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let n = self.agent_dim;
                let pts: Vec<Vec<f64>> = (0..samples).map(|_| bounds.sample(&mut rng, n)).collect();
                let got = estimate_rsi_mu(&sum, minimizer, pts);
                if got < mu - 1e-9 {
                    return Err(GraphError::AuditFailed(format!(
                        "sampled restricted-secant modulus {got:.6e} below declared {mu:.6e}"
                    )));
                }
                Ok(got)
            }
        }
    }
}

/// Rewrites the consensus problem in `x = 𝐐x′` coordinates as the
/// equality-constrained instance `min F(𝐐x′)` s.t. `[𝚲 0] x′ = 0`.
///
/// The penalty weight `𝚲⁻¹` makes the augmented flow of the returned
/// instance coincide with the proportional-integral flow under `x = 𝐐x′`:
/// `α Tᵀ𝚲⁻¹T = α blkdiag(𝚲, 0) = 𝐐ᵀ(α𝑳)𝐐`. The declared `μ` is the global
/// modulus divided by `N`, because the consensus coordinate is `√N·x̄`.
pub fn embed_as_constrained(p: &DistributedProblem) -> Result<ProblemInstance> {
    let n = p.agent_dim;
    let big_n = p.n_agents();
    let eye = DenseMatrix::identity(n);
    let lam = p.transform.lambda_matrix().kron(&eye);
    let rows = (big_n - 1) * n;
    if rows == 0 {
        return Err(GraphError::TooFewNodes(big_n));
    }
    let mut t = DenseMatrix::zeros(rows, big_n * n);
    t.set_block(0, 0, &lam);
    let w = DenseMatrix::from_diag(&(0..rows).map(|i| 1.0 / lam[(i, i)]).collect::<Vec<_>>());

    let class = match p.global {
        GlobalCondition::StronglyConvex { .. } => ConvexityClass::PartiallyStronglyConvex,
        GlobalCondition::Rsi { .. } => ConvexityClass::Rsi,
    };
    let l = p.agents.iter().map(|a| a.declared_l).fold(0.0, f64::max);
    let objective = ObjectiveOracle::new(
        Function::Composed {
            inner: Box::new(p.stacked_function()),
            q: p.kron_q(),
        },
        l,
        p.global.mu() / big_n as f64,
        class,
    )?;
    let constraint = EqualityConstraint::new(t, vec![0.0; rows])?;
    let inst = ProblemInstance::new(
        "distributed_embedding",
        objective,
        constraint,
        p.alpha,
        None,
    )?
    .with_penalty_weight(w)?;
    Ok(inst)
}

/// `‖(I − (1/N)𝟏𝟏ᵀ ⊗ Iₙ) x‖` for a stacked vector of `N` blocks of size `agent_dim`.
pub fn consensus_error(x: &[f64], agent_dim: usize) -> f64 {
    assert!(
        agent_dim > 0 && x.len().is_multiple_of(agent_dim),
        "stacked vector length"
    );
    let blocks = x.len() / agent_dim;
    let mut mean = vec![0.0; agent_dim];
    for b in x.chunks(agent_dim) {
        mean.iter_mut()
            .zip(b)
            .for_each(|(m, v)| *m += v / blocks as f64);
    }
    x.chunks(agent_dim)
        .flat_map(|b| b.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distgraph::{build_graph, GraphKind};

    fn quad(h: f64, l: f64) -> ObjectiveOracle {
        ObjectiveOracle::new(
            Function::Quadratic {
                h: DenseMatrix::from_diag(&[h]),
                c: None,
            },
            l,
            0.0,
            ConvexityClass::Custom,
        )
        .unwrap()
    }

    #[test]
    fn consensus_error_examples() {
        assert_eq!(consensus_error(&[2.0, 3.0, 2.0, 3.0, 2.0, 3.0], 2), 0.0);
        assert!((consensus_error(&[1.0, -1.0], 1) - 2f64.sqrt()).abs() < 1e-15);
        let x = [0.3, -1.2, 4.0];
        let shifted: Vec<f64> = x.iter().map(|v| v + 7.5).collect();
        assert!((consensus_error(&x, 1) - consensus_error(&shifted, 1)).abs() < 1e-12);
    }

    #[test]
    fn two_agent_embedding() {
        let g = build_graph(GraphKind::Path, 2, 0).unwrap();
        let dp = DistributedProblem::new(
            vec![quad(1.0, 1.0), quad(1.0, 1.0)],
            g,
            1.0,
            GlobalCondition::StronglyConvex { mu: 2.0 },
        )
        .unwrap();
        assert!((dp.transform.lambda[0] - 2.0).abs() < 1e-12);
        let inst = embed_as_constrained(&dp).unwrap();
        assert_eq!((inst.m(), inst.n()), (1, 2));
        assert!((inst.constraint.t()[(0, 0)] - 2.0).abs() < 1e-12);
        // F(𝐐x′) = ½‖x′‖² since 𝐐 is orthogonal.
        let (h, _) = inst.objective.function.quadratic_form().unwrap();
        assert!(h.sub(&DenseMatrix::identity(2)).max_abs() < 1e-12);
        // penalty Hessian equals 𝐐ᵀ(α𝑳)𝐐
        let want = dp
            .kron_q()
            .transpose()
            .matmul(&dp.kron_laplacian())
            .matmul(&dp.kron_q());
        assert!(inst.penalty_hessian().sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn nonconvex_local_passes_global_audit() {
        let g = build_graph(GraphKind::Path, 2, 0).unwrap();
        let dp = DistributedProblem::new(
            vec![quad(-1.0, 1.0), quad(2.0, 2.0)],
            g,
            1.0,
            GlobalCondition::StronglyConvex { mu: 1.0 },
        )
        .unwrap();
        let mu = dp.audit_global(500, SampleBox::default(), 3).unwrap();
        assert!((mu - 1.0).abs() < 1e-9);
        embed_as_constrained(&dp).unwrap();

        let bad = DistributedProblem {
            global: GlobalCondition::StronglyConvex { mu: 1.5 },
            ..dp
        };
        assert!(matches!(
            bad.audit_global(500, SampleBox::default(), 3),
            Err(GraphError::AuditFailed(_))
        ));
    }

    #[test]
    fn agent_count_must_match_graph() {
        let g = build_graph(GraphKind::Path, 3, 0).unwrap();
        let r = DistributedProblem::new(
            vec![quad(1.0, 1.0)],
            g,
            1.0,
            GlobalCondition::StronglyConvex { mu: 1.0 },
        );
        assert!(matches!(r, Err(GraphError::AgentDimension(_))));
    }
}
