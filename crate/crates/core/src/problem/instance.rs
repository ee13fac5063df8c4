use serde::{Deserialize, Serialize};

use super::{ConvexityClass, EqualityConstraint, Function, ObjectiveOracle, ProblemError, Result};
use crate::linalg::{max_abs, DenseMatrix};

/// A primal-dual pair `(x, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// `min f(x)` subject to `T x = b`, with augmented-Lagrangian penalty
/// `(α/2)‖Tx − b‖²_W`. The weight `W` defaults to the identity.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub objective: ObjectiveOracle,
    pub constraint: EqualityConstraint,
    pub alpha: f64,
    penalty_weight: Option<DenseMatrix>,
    pub known_solution: Option<Solution>,
}

/// KKT residuals above this reject a declared solution.
pub const KNOWN_SOLUTION_TOL: f64 = 1e-8;

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        objective: ObjectiveOracle,
        constraint: EqualityConstraint,
        alpha: f64,
        known_solution: Option<Solution>,
    ) -> Result<Self> {
        let p = Self {
            name: name.into(),
            objective,
            constraint,
            alpha,
            penalty_weight: None,
            known_solution,
        };
        p.validate()?;
        Ok(p)
    }

    /// Replaces the identity penalty weight with an SPD `m×m` matrix `W`.
    pub fn with_penalty_weight(mut self, w: DenseMatrix) -> Result<Self> {
        let m = self.m();
        if w.rows() != m || w.cols() != m {
            return Err(ProblemError::Dimension(format!(
                "penalty weight must be {m}x{m}"
            )));
        }
        let eig = crate::linalg::symmetric_eigen(&w)?;
        if eig.values[0] <= 0.0 {
            return Err(ProblemError::InvalidParameter {
                name: "penalty_weight",
                reason: "must be positive definite".into(),
            });
        }
        self.penalty_weight = Some(w);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.objective.dim() != self.constraint.cols() {
            return Err(ProblemError::Dimension(format!(
                "objective is on R^{} but constraint acts on R^{}",
                self.objective.dim(),
                self.constraint.cols()
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ProblemError::InvalidParameter {
                name: "alpha",
                reason: "must be positive".into(),
            });
        }
        if let Some(sol) = &self.known_solution {
            if sol.x.len() != self.n() || sol.lambda.len() != self.m() {
                return Err(ProblemError::Dimension(
                    "known solution has wrong dimensions".into(),
                ));
            }
            let residual = kkt_residual(self, &sol.x, &sol.lambda);
            if residual > KNOWN_SOLUTION_TOL {
                return Err(ProblemError::KktViolated { residual });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.constraint.cols()
    }

    pub fn m(&self) -> usize {
        self.constraint.rows()
    }

    pub fn penalty_weight(&self) -> Option<&DenseMatrix> {
        self.penalty_weight.as_ref()
    }

    /// `α TᵀW(Tx − b)`, the gradient of the penalty term.
    pub fn penalty_gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = self.constraint.residual(x);
        let wr = match &self.penalty_weight {
            Some(w) => w.matvec(&r),
            None => r,
        };
        self.constraint
            .t()
            .tr_matvec(&wr)
            .into_iter()
            .map(|v| self.alpha * v)
            .collect()
    }

    /// `α TᵀWT`, the Hessian of the penalty term.
    pub fn penalty_hessian(&self) -> DenseMatrix {
        let t = self.constraint.t();
        let wt = match &self.penalty_weight {
            Some(w) => w.matmul(t),
            None => t.clone(),
        };
        t.transpose().matmul(&wt).scale(self.alpha)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn to_doc(&self) -> ProblemDoc {
        ProblemDoc {
            name: self.name.clone(),
            n: self.n(),
            m: self.m(),
            t: self.constraint.t().clone(),
            b: self.constraint.b().to_vec(),
            alpha: self.alpha,
            objective: self.objective.function.clone(),
            declared_l: self.objective.declared_l,
            declared_mu: self.objective.declared_mu,
            convexity_class: self.objective.class,
            penalty_weight: self.penalty_weight.clone(),
            known_solution: self.known_solution.clone(),
        }
    }
}

/// JSON form of a [`ProblemInstance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub name: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub t: DenseMatrix,
    pub b: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub objective: Function,
    pub declared_l: f64,
    #[serde(default)]
    pub declared_mu: f64,
    #[serde(default)]
    pub convexity_class: ConvexityClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_weight: Option<DenseMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_solution: Option<Solution>,
}

fn default_alpha() -> f64 {
    1.0
}

impl TryFrom<ProblemDoc> for ProblemInstance {
    type Error = ProblemError;

    fn try_from(doc: ProblemDoc) -> Result<Self> {
        if doc.t.rows() != doc.m || doc.t.cols() != doc.n {
            return Err(ProblemError::Dimension(format!(
                "T is {}x{} but n = {}, m = {}",
                doc.t.rows(),
                doc.t.cols(),
                doc.n,
                doc.m
            )));
        }
        let objective = ObjectiveOracle::new(
            doc.objective,
            doc.declared_l,
            doc.declared_mu,
            doc.convexity_class,
        )?;
        let constraint = EqualityConstraint::new(doc.t, doc.b)?;
        let p = ProblemInstance::new(doc.name, objective, constraint, doc.alpha, None)?;
        let p = match doc.penalty_weight {
            Some(w) => p.with_penalty_weight(w)?,
            None => p,
        };
        let p = ProblemInstance {
            known_solution: doc.known_solution,
            ..p
        };
        p.validate()?;
        Ok(p)
    }
}

/// Index partition `{0..n} = S ∪ Sᶜ` (zero-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    pub selected: Vec<usize>,
    pub complement: Vec<usize>,
}

impl PartitionSpec {
    pub fn new(n: usize, mut selected: Vec<usize>) -> Result<Self> {
        selected.sort_unstable();
        selected.dedup();
        if selected.iter().any(|&i| i >= n) {
            return Err(ProblemError::Dimension(
                "partition index out of range".into(),
            ));
        }
        let complement = (0..n)
            .filter(|i| selected.binary_search(i).is_err())
            .collect();
        Ok(Self {
            selected,
            complement,
        })
    }

    /// The free coordinates of `x′ = Qᵀx`: the last `n − m` entries, which
    /// the constraint `TQ = [R₁ᵀ 0]` does not touch.
    pub fn null_space(n: usize, m: usize) -> Self {
        Self {
            selected: (m..n).collect(),
            complement: (0..m).collect(),
        }
    }

    /// The partitioned vector `x_S`.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.selected.iter().map(|&i| x[i]).collect()
    }
}

/// Oracle for `g(x′) = f(Qx′)`; `∇g(x′) = Qᵀ∇f(Qx′)` and the declared
/// constants carry over since `Q` is orthogonal.
pub fn transformed_oracle(p: &ProblemInstance) -> ObjectiveOracle {
    let o = &p.objective;
    ObjectiveOracle {
        function: Function::Composed {
            inner: Box::new(o.function.clone()),
            q: p.constraint.qr().q.clone(),
        },
        declared_l: o.declared_l,
        declared_mu: o.declared_mu,
        class: o.class,
    }
}

/// `max(‖∇f(x) + Tᵀλ‖_∞, ‖Tx − b‖_∞)`.
pub fn kkt_residual(p: &ProblemInstance, x: &[f64], lambda: &[f64]) -> f64 {
    let mut stationarity = p.objective.gradient(x);
    let tl = p.constraint.t().tr_matvec(lambda);
    stationarity.iter_mut().zip(tl).for_each(|(s, v)| *s += v);
    max_abs(&stationarity).max(max_abs(&p.constraint.residual(x)))
}
