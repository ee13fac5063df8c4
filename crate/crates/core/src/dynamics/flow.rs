use serde::{Deserialize, Serialize};

use super::{integrate_field, DynamicsError, IntegrateOptions, Result, Trajectory};
use crate::distgraph::DistributedProblem;
use crate::linalg::DenseMatrix;
use crate::problem::{Function, ProblemInstance, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Augmented,
    Standard,
    DistributedPi,
}

/// A primal-dual vector field bound to its problem data.
#[derive(Debug, Clone, Copy)]
pub enum Flow<'a> {
    /// `ẋ = −∇f(x) − Tᵀλ − αTᵀW(Tx − b)`, `λ̇ = Tx − b`.
    Augmented(&'a ProblemInstance),
    /// `ẋ = −∇f(x) − Tᵀλ`, `λ̇ = Tx − b`.
    Standard(&'a ProblemInstance),
    /// `ẋ = −∇F(x) − α𝑳x − 𝑳λ`, `λ̇ = 𝑳x` with `𝑳 = L ⊗ Iₙ`.
    DistributedPi(&'a DistributedProblem),
}

impl<'a> Flow<'a> {
    pub fn new(kind: FlowKind, p: &'a ProblemInstance) -> Result<Self> {
        match kind {
            FlowKind::Augmented => Ok(Flow::Augmented(p)),
            FlowKind::Standard => Ok(Flow::Standard(p)),
            FlowKind::DistributedPi => Err(DynamicsError::InvalidOption(
                "flow",
                "distributed_pi needs a distributed problem".into(),
            )),
        }
    }

    pub fn kind(&self) -> FlowKind {
        match self {
            Flow::Augmented(_) => FlowKind::Augmented,
            Flow::Standard(_) => FlowKind::Standard,
            Flow::DistributedPi(_) => FlowKind::DistributedPi,
        }
    }

    /// `(dim x, dim λ)`.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Flow::Augmented(p) | Flow::Standard(p) => (p.n(), p.m()),
            Flow::DistributedPi(d) => (d.stacked_dim(), d.stacked_dim()),
        }
    }
}

struct PreparedField<'a> {
    flow: Flow<'a>,
    n_x: usize,
    laplacian: Option<DenseMatrix>,
    stacked: Option<Function>,
}

impl PreparedField<'_> {
    fn eval(&self, z: &[f64], dz: &mut [f64]) -> std::result::Result<(), ()> {
        let (x, lambda) = z.split_at(self.n_x);
        let (dx, dl) = dz.split_at_mut(self.n_x);
        match self.flow {
            Flow::Augmented(p) | Flow::Standard(p) => {
                let t = p.constraint.t();
                let grad = p.objective.gradient(x);
                let tl = t.tr_matvec(lambda);
                let r = p.constraint.residual(x);
                let pen = matches!(self.flow, Flow::Augmented(_)).then(|| p.penalty_gradient(x));
                for i in 0..self.n_x {
                    dx[i] = -grad[i] - tl[i] - pen.as_ref().map_or(0.0, |v| v[i]);
                }
                dl.copy_from_slice(&r);
                if grad.iter().any(|g| !g.is_finite()) {
                    return Err(());
                }
            }
            Flow::DistributedPi(d) => {
                let l = self.laplacian.as_ref().expect("laplacian prepared");
                let grad = self
                    .stacked
                    .as_ref()
                    .expect("stacked objective prepared")
                    .gradient(x);
                let lx = l.matvec(x);
                let ll = l.matvec(lambda);
                for i in 0..self.n_x {
                    dx[i] = -grad[i] - d.alpha * lx[i] - ll[i];
                }
                dl.copy_from_slice(&lx);
                if grad.iter().any(|g| !g.is_finite()) {
                    return Err(());
                }
            }
        }
        Ok(())
    }
}

/// Integrates `flow` from `z0 = (x₀, λ₀)`. When `reference` is given the
/// trajectory carries `‖z(t) − z*‖`.
///
/// The distributed flow requires `λ₀ = 0`, which keeps `λ(t)` in
/// `range(𝑳)` so that the equilibrium multiplier is unique.
pub fn integrate(
    flow: Flow<'_>,
    z0: &Solution,
    reference: Option<&Solution>,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let (n_x, n_l) = flow.dims();
    if z0.x.len() != n_x || z0.lambda.len() != n_l {
        return Err(DynamicsError::Dimension(format!(
            "initial state is ({}, {}), flow expects ({n_x}, {n_l})",
            z0.x.len(),
            z0.lambda.len()
        )));
    }
    if let Some(r) = reference {
        if r.x.len() != n_x || r.lambda.len() != n_l {
            return Err(DynamicsError::Dimension(
                "reference has wrong dimensions".into(),
            ));
        }
    }
    if matches!(flow, Flow::DistributedPi(_)) && z0.lambda.iter().any(|&v| v != 0.0) {
        return Err(DynamicsError::InvalidOption(
            "lambda0",
            "distributed flow starts from λ(0) = 0".into(),
        ));
    }
    let (laplacian, stacked) = match flow {
        Flow::DistributedPi(d) => (Some(d.kron_laplacian()), Some(d.stacked_function())),
        _ => (None, None),
    };
    let field = PreparedField {
        flow,
        n_x,
        laplacian,
        stacked,
    };
    let mut start = z0.x.clone();
    start.extend_from_slice(&z0.lambda);
    let (times, states) = integrate_field(|z, dz| field.eval(z, dz), &start, opts)?;
    Ok(Trajectory::new(times, states, n_x, reference.cloned()))
}
