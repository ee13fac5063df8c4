use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ProblemError, Result};
use crate::linalg::{dot, DenseMatrix};

/// A differentiable map `ℝⁿ → ℝ` supplied by the caller.
pub trait Differentiable: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Objective functions with closed-form gradients.
///
/// Serialized as `{"kind": ..., "parameters": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum Function {
    /// `f ≡ 0` on `ℝⁿ`.
    Zero { n: usize },
    /// `cᵀx + offset`.
    Affine {
        c: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `½ xᵀHx + cᵀx`; `c` defaults to zero.
    Quadratic {
        h: DenseMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Vec<f64>>,
    },
    /// `weight · Σₖ sin²(xₖ)`.
    SinSquared { n: usize, weight: f64 },
    /// Pointwise sum of functions on the same space.
    Sum { terms: Vec<Function> },
    /// Block-separable sum `Σᵢ fᵢ(xᵢ)` over consecutive blocks of the argument.
    Stacked { blocks: Vec<Function> },
    /// `x ↦ inner(Q x)`.
    Composed {
        inner: Box<Function>,
        q: DenseMatrix,
    },
    #[serde(skip)]
    Custom(Arc<dyn Differentiable>),
}

impl Function {
    pub fn dim(&self) -> usize {
        match self {
            Function::Zero { n } | Function::SinSquared { n, .. } => *n,
            Function::Affine { c, .. } => c.len(),
            Function::Quadratic { h, .. } => h.rows(),
            Function::Sum { terms } => terms.first().map_or(0, Function::dim),
            Function::Stacked { blocks } => blocks.iter().map(Function::dim).sum(),
            Function::Composed { q, .. } => q.cols(),
            Function::Custom(f) => f.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Function::Zero { n } | Function::SinSquared { n, .. } if *n == 0 => Err(
                ProblemError::Dimension("objective dimension must be positive".into()),
            ),
            Function::SinSquared { weight, .. } if !weight.is_finite() => {
                Err(ProblemError::InvalidParameter {
                    name: "weight",
                    reason: "must be finite".into(),
                })
            }
            Function::Affine { c, offset } => {
                if c.is_empty() || c.iter().chain([offset]).any(|v| !v.is_finite()) {
                    return Err(ProblemError::InvalidParameter {
                        name: "c",
                        reason: "affine coefficients must be finite and non-empty".into(),
                    });
                }
                Ok(())
            }
            Function::Quadratic { h, c } => {
                if !h.is_square() || h.rows() == 0 {
                    return Err(ProblemError::Dimension(
                        "quadratic Hessian must be square".into(),
                    ));
                }
                if h.asymmetry() > 1e-12 * (1.0 + h.max_abs()) {
                    return Err(ProblemError::InvalidParameter {
                        name: "h",
                        reason: "quadratic Hessian must be symmetric".into(),
                    });
                }
                if let Some(c) = c {
                    if c.len() != h.rows() || c.iter().any(|v| !v.is_finite()) {
                        return Err(ProblemError::Dimension(
                            "linear term length must match Hessian".into(),
                        ));
                    }
                }
                Ok(())
            }
            Function::Sum { terms } => {
                let n = terms
                    .first()
                    .map(Function::dim)
                    .ok_or_else(|| ProblemError::Dimension("sum needs at least one term".into()))?;
                for t in terms {
                    t.validate()?;
                    if t.dim() != n {
                        return Err(ProblemError::Dimension(
                            "sum terms disagree on dimension".into(),
                        ));
                    }
                }
                Ok(())
            }
            Function::Stacked { blocks } => {
                if blocks.is_empty() {
                    return Err(ProblemError::Dimension(
                        "stacked objective needs blocks".into(),
                    ));
                }
                blocks.iter().try_for_each(Function::validate)
            }
            Function::Composed { inner, q } => {
                inner.validate()?;
                if q.rows() != inner.dim() {
                    return Err(ProblemError::Dimension(format!(
                        "composition matrix has {} rows, inner function takes {}",
                        q.rows(),
                        inner.dim()
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Function::Zero { .. } => 0.0,
            Function::Affine { c, offset } => dot(c, x) + offset,
            Function::Quadratic { h, c } => {
                let hx = h.matvec(x);
                0.5 * dot(x, &hx) + c.as_ref().map_or(0.0, |c| dot(c, x))
            }
            Function::SinSquared { weight, .. } => {
                weight * x.iter().map(|v| v.sin().powi(2)).sum::<f64>()
            }
            Function::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
            Function::Stacked { blocks } => {
                let mut off = 0;
                blocks
                    .iter()
                    .map(|b| {
                        let d = b.dim();
                        let v = b.value(&x[off..off + d]);
                        off += d;
                        v
                    })
                    .sum()
            }
            Function::Composed { inner, q } => inner.value(&q.matvec(x)),
            Function::Custom(f) => f.value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Function::Zero { n } => vec![0.0; *n],
            Function::Affine { c, .. } => c.clone(),
            Function::Quadratic { h, c } => {
                let mut g = h.matvec(x);
                if let Some(c) = c {
                    g.iter_mut().zip(c).for_each(|(gi, ci)| *gi += ci);
                }
                g
            }
            // d/dx sin²x = sin 2x
            Function::SinSquared { weight, .. } => {
                x.iter().map(|v| weight * (2.0 * v).sin()).collect()
            }
            Function::Sum { terms } => {
                let mut g = vec![0.0; x.len()];
                for t in terms {
                    g.iter_mut().zip(t.gradient(x)).for_each(|(a, b)| *a += b);
                }
                g
            }
            Function::Stacked { blocks } => {
                let mut g = Vec::with_capacity(x.len());
                let mut off = 0;
                for b in blocks {
                    let d = b.dim();
                    g.extend(b.gradient(&x[off..off + d]));
                    off += d;
                }
                g
            }
            Function::Composed { inner, q } => q.tr_matvec(&inner.gradient(&q.matvec(x))),
            Function::Custom(f) => f.gradient(x),
        }
    }

    /// `(H, c)` with `f(x) = ½xᵀHx + cᵀx + const` when the function is quadratic.
    pub fn quadratic_form(&self) -> Option<(DenseMatrix, Vec<f64>)> {
        match self {
            Function::Zero { n } => Some((DenseMatrix::zeros(*n, *n), vec![0.0; *n])),
            Function::Affine { c, .. } => Some((DenseMatrix::zeros(c.len(), c.len()), c.clone())),
            Function::Quadratic { h, c } => {
                Some((h.clone(), c.clone().unwrap_or_else(|| vec![0.0; h.rows()])))
            }
            Function::Sum { terms } => {
                let n = self.dim();
                let mut h = DenseMatrix::zeros(n, n);
                let mut c = vec![0.0; n];
                for t in terms {
                    let (ht, ct) = t.quadratic_form()?;
                    h = h.add(&ht);
                    c.iter_mut().zip(ct).for_each(|(a, b)| *a += b);
                }
                Some((h, c))
            }
            Function::Stacked { blocks } => {
                let n = self.dim();
                let mut h = DenseMatrix::zeros(n, n);
                let mut c = Vec::with_capacity(n);
                let mut off = 0;
                for b in blocks {
                    let (hb, cb) = b.quadratic_form()?;
                    h.set_block(off, off, &hb);
                    c.extend(cb);
                    off += b.dim();
                }
                Some((h, c))
            }
            Function::Composed { inner, q } => {
                let (h, c) = inner.quadratic_form()?;
                Some((q.transpose().matmul(&h).matmul(q), q.tr_matvec(&c)))
            }
            Function::SinSquared { .. } | Function::Custom(_) => None,
        }
    }
}

/// Convexity class an oracle is declared to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexityClass {
    #[default]
    Convex,
    PartiallyStronglyConvex,
    Rsi,
    Custom,
}

/// A differentiable objective together with its declared constants: the
/// gradient Lipschitz constant `l` and the (partial, or restricted-secant)
/// strong convexity modulus `μ`.
#[derive(Debug, Clone)]
pub struct ObjectiveOracle {
    pub function: Function,
    pub declared_l: f64,
    pub declared_mu: f64,
    pub class: ConvexityClass,
}

impl ObjectiveOracle {
    pub fn new(
        function: Function,
        declared_l: f64,
        declared_mu: f64,
        class: ConvexityClass,
    ) -> Result<Self> {
        function.validate()?;
        if !(declared_l.is_finite() && declared_l > 0.0) {
            return Err(ProblemError::InvalidParameter {
                name: "declared_l",
                reason: "must be positive".into(),
            });
        }
        if !(declared_mu.is_finite() && declared_mu >= 0.0) {
            return Err(ProblemError::InvalidParameter {
                name: "declared_mu",
                reason: "must be nonnegative".into(),
            });
        }
        Ok(Self {
            function,
            declared_l,
            declared_mu,
            class,
        })
    }

    pub fn dim(&self) -> usize {
        self.function.dim()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.function.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.function.gradient(x)
    }
}
