use super::{integrate_field, DynamicsError, IntegrateOptions, Result, StepControl};
use crate::distgraph::{embed_as_constrained, DistributedProblem};
use crate::linalg::{norm2, DenseMatrix};
use crate::problem::{kkt_residual, ProblemInstance, Solution};

/// KKT residual at which the flow stage hands over to Newton polishing.
const FLOW_STAGE_TOL: f64 = 1e-6;
/// Target KKT residual of the returned point.
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
const FLOW_CHUNKS: usize = 200;
const NEWTON_ITERS: usize = 60;

/// Computes a KKT point `(x*, λ*)` of the instance.
///
/// Quadratic objectives are handled by one direct solve of the KKT system.
/// Other objectives follow the augmented flow from the origin until the KKT
/// residual drops below `1e-6` and are then polished by damped Newton steps
/// on the KKT equations with a finite-difference Hessian.
pub fn equilibrium_solve(p: &ProblemInstance) -> Result<Solution> {
    if let Some((h, c)) = p.objective.function.quadratic_form() {
        if let Ok(sol) = solve_quadratic_kkt(p, &h, &c) {
            if kkt_residual(p, &sol.x, &sol.lambda) <= EQUILIBRIUM_TOL * (1.0 + norm2(&sol.x)) {
                return Ok(sol);
            }
        }
    }
    let start = Solution {
        x: vec![0.0; p.n()],
        lambda: vec![0.0; p.m()],
    };
    let coarse = flow_stage(p, start)?;
    newton_polish(p, coarse)
}

/// Equilibrium of the distributed proportional-integral flow reached from
/// `λ(0) = 0`, mapped back from the embedded problem by `x = 𝐐x′` and
/// `λ = 𝐐[λ′; 0]`.
pub fn distributed_equilibrium(d: &DistributedProblem) -> Result<Solution> {
    let embedded = embed_as_constrained(d)?;
    let sol = equilibrium_solve(&embedded)?;
    let q = d.kron_q();
    let mut lam = sol.lambda.clone();
    lam.resize(d.stacked_dim(), 0.0);
    Ok(Solution {
        x: q.matvec(&sol.x),
        lambda: q.matvec(&lam),
    })
}

fn kkt_matrix(p: &ProblemInstance, h: &DenseMatrix) -> Result<DenseMatrix> {
    let t = p.constraint.t();
    let tt = t.transpose();
    Ok(DenseMatrix::from_blocks(&[
        vec![Some(h), Some(&tt)],
        vec![Some(t), None],
    ])?)
}

fn split(p: &ProblemInstance, z: Vec<f64>) -> Solution {
    let mut x = z;
    let lambda = x.split_off(p.n());
    Solution { x, lambda }
}

fn solve_quadratic_kkt(p: &ProblemInstance, h: &DenseMatrix, c: &[f64]) -> Result<Solution> {
    let k = kkt_matrix(p, h)?;
    let mut rhs: Vec<f64> = c.iter().map(|v| -v).collect();
    rhs.extend_from_slice(p.constraint.b());
    Ok(split(p, k.solve(&rhs)?))
}

fn flow_stage(p: &ProblemInstance, start: Solution) -> Result<Solution> {
    let n = p.n();
    let t = p.constraint.t();
    let opts = IntegrateOptions {
        horizon: 5.0,
        control: StepControl::Adaptive {
            initial_step: 1e-2,
            tolerance: 1e-10,
        },
        stride: usize::MAX,
    };
    let field = |z: &[f64], dz: &mut [f64]| {
        let (x, lambda) = z.split_at(n);
        let g = p.objective.gradient(x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(());
        }
        let tl = t.tr_matvec(lambda);
        let pen = p.penalty_gradient(x);
        for i in 0..n {
            dz[i] = -g[i] - tl[i] - pen[i];
        }
        dz[n..].copy_from_slice(&p.constraint.residual(x));
        Ok(())
    };
    let mut z: Vec<f64> = start.x.iter().chain(&start.lambda).copied().collect();
    let mut residual = kkt_residual(p, &start.x, &start.lambda);
    for _ in 0..FLOW_CHUNKS {
        if residual <= FLOW_STAGE_TOL {
            break;
        }
        let (_, states) = integrate_field(field, &z, &opts)?;
        z = states
            .into_iter()
            .last()
            .expect("integration records the final state");
        residual = kkt_residual(p, &z[..n], &z[n..]);
    }
    if residual > FLOW_STAGE_TOL {
        return Err(DynamicsError::NoConvergence { residual });
    }
    Ok(split(p, z))
}

fn kkt_vector(p: &ProblemInstance, x: &[f64], lambda: &[f64]) -> Vec<f64> {
    let mut r = p.objective.gradient(x);
    r.iter_mut()
        .zip(p.constraint.t().tr_matvec(lambda))
        .for_each(|(a, b)| *a += b);
    r.extend(p.constraint.residual(x));
    r
}

fn fd_hessian(p: &ProblemInstance, x: &[f64]) -> DenseMatrix {
    let n = x.len();
    let mut h = DenseMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let step = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + step;
        let gp = p.objective.gradient(&xp);
        xp[j] = x[j] - step;
        let gm = p.objective.gradient(&xp);
        xp[j] = x[j];
        for i in 0..n {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    h.symmetric_part()
}

fn newton_polish(p: &ProblemInstance, mut sol: Solution) -> Result<Solution> {
    let mut residual = kkt_residual(p, &sol.x, &sol.lambda);
    for _ in 0..NEWTON_ITERS {
        if residual <= EQUILIBRIUM_TOL {
            return Ok(sol);
        }
        let k = kkt_matrix(p, &fd_hessian(p, &sol.x))?;
        let f = kkt_vector(p, &sol.x, &sol.lambda);
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let Ok(dir) = k.solve(&neg) else { break };
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-8 {
            let z: Vec<f64> = sol
                .x
                .iter()
                .chain(&sol.lambda)
                .zip(&dir)
                .map(|(a, d)| a + step * d)
                .collect();
            let cand = split(p, z);
            let r = kkt_residual(p, &cand.x, &cand.lambda);
            if r < residual {
                sol = cand;
                residual = r;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if residual <= EQUILIBRIUM_TOL {
        Ok(sol)
    } else {
        Err(DynamicsError::NoConvergence { residual })
    }
}
