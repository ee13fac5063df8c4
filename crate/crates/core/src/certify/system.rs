use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CertifyError, Result};
use crate::dynamics::{equilibrium_solve, integrate_field, IntegrateOptions};
use crate::linalg::{dot, norm2, sub, DenseMatrix};
use crate::problem::{Function, ProblemInstance, SampleBox, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Original,
    Transformed,
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Frame::Original => "original",
            Frame::Transformed => "transformed",
        })
    }
}

impl std::str::FromStr for Frame {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "original" => Ok(Frame::Original),
            "transformed" => Ok(Frame::Transformed),
            other => Err(format!(
                "unknown frame `{other}` (expected original or transformed)"
            )),
        }
    }
}

/// The co-coercivity multiplier `[[0, l], [l, −2]] ⊗ Iₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqcMultiplier {
    pub l: f64,
}

impl IqcMultiplier {
    pub fn new(l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(CertifyError::InvalidParameter(
                "l",
                format!("must be positive, got {l}"),
            ));
        }
        Ok(Self { l })
    }

    /// `2n×2n` matrix acting on `(y, u)`.
    pub fn matrix(&self, n: usize) -> DenseMatrix {
        let mut pi = DenseMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            pi[(i, n + i)] = self.l;
            pi[(n + i, i)] = self.l;
            pi[(n + i, n + i)] = -2.0;
        }
        pi
    }
}

/// `Δ(y) = ∇f(y + x*) − ∇f(x*) − S·y`, where `S` is zero in the original
/// frame and `μQ₂Q₂ᵀ` in the transformed frame. `y` is in original coordinates.
#[derive(Debug, Clone)]
pub struct DeltaOracle {
    function: Function,
    x_star: Vec<f64>,
    grad_star: Vec<f64>,
    shift: Option<DenseMatrix>,
}

impl DeltaOracle {
    fn new(function: Function, x_star: Vec<f64>, shift: Option<DenseMatrix>) -> Self {
        let grad_star = function.gradient(&x_star);
        Self {
            function,
            x_star,
            grad_star,
            shift,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_star.len()
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = y.iter().zip(&self.x_star).map(|(a, b)| a + b).collect();
        let mut u = sub(&self.function.gradient(&x), &self.grad_star);
        if let Some(s) = &self.shift {
            u.iter_mut().zip(s.matvec(y)).for_each(|(a, b)| *a -= b);
        }
        u
    }
}

/// Linear part `(A, B, C)` of the error dynamics `ż = Az + BΔ(Cz)`.
#[derive(Debug, Clone)]
pub struct ErrorSystem {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: DenseMatrix,
    pub pi_l: f64,
    pub delta: DeltaOracle,
    pub frame: Frame,
    /// Equilibrium the error coordinates are measured from.
    pub equilibrium: Solution,
}

impl ErrorSystem {
    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn multiplier(&self) -> IqcMultiplier {
        IqcMultiplier { l: self.pi_l }
    }

    /// `Az + BΔ(Cz)`.
    pub fn field(&self, z: &[f64]) -> Vec<f64> {
        let u = self.delta.eval(&self.c.matvec(z));
        let mut dz = self.a.matvec(z);
        dz.iter_mut()
            .zip(self.b.matvec(&u))
            .for_each(|(a, b)| *a += b);
        dz
    }

    /// RK4 integration of the error dynamics from `z0`.
    pub fn simulate(
        &self,
        z0: &[f64],
        opts: &IntegrateOptions,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if z0.len() != self.state_dim() {
            return Err(CertifyError::InvalidParameter(
                "z0",
                format!("expected {} entries, got {}", self.state_dim(), z0.len()),
            ));
        }
        let out = integrate_field(
            |z, dz| {
                let f = self.field(z);
                if f.iter().any(|v| !v.is_finite()) {
                    return Err(());
                }
                dz.copy_from_slice(&f);
                Ok(())
            },
            z0,
            opts,
        )?;
        Ok(out)
    }
}

fn equilibrium_of(p: &ProblemInstance) -> Result<Solution> {
    match &p.known_solution {
        Some(s) => Ok(s.clone()),
        None => Ok(equilibrium_solve(p)?),
    }
}

/// Error system in the original coordinates at the instance's known (or
/// computed) equilibrium.
pub fn build_error_system(p: &ProblemInstance) -> Result<ErrorSystem> {
    build_error_system_at(p, &equilibrium_of(p)?)
}

/// `A = [[−αTᵀWT, −Tᵀ], [T, 0]]`, `B = [−I; 0]`, `C = [I 0]`.
pub fn build_error_system_at(p: &ProblemInstance, eq: &Solution) -> Result<ErrorSystem> {
    check_equilibrium(p, eq)?;
    let (n, m) = (p.n(), p.m());
    let t = p.constraint.t();
    let tt = t.transpose();
    let neg_tt = tt.scale(-1.0);
    let top_left = p.penalty_hessian().scale(-1.0);
    let a = DenseMatrix::from_blocks(&[
        vec![Some(&top_left), Some(&neg_tt)],
        vec![Some(t), Some(&DenseMatrix::zeros(m, m))],
    ])?;
    let mut b = DenseMatrix::zeros(n + m, n);
    b.set_block(0, 0, &DenseMatrix::identity(n).scale(-1.0));
    let mut c = DenseMatrix::zeros(n, n + m);
    c.set_block(0, 0, &DenseMatrix::identity(n));
    Ok(ErrorSystem {
        a,
        b,
        c,
        pi_l: IqcMultiplier::new(p.objective.declared_l)?.l,
        delta: DeltaOracle::new(p.objective.function.clone(), eq.x.clone(), None),
        frame: Frame::Original,
        equilibrium: eq.clone(),
    })
}

/// Error system in `x = Qx′` coordinates with the free-block strong
/// convexity `μ` moved into the linear part.
pub fn build_transformed_system(p: &ProblemInstance, mu: f64) -> Result<ErrorSystem> {
    build_transformed_system_at(p, mu, &equilibrium_of(p)?)
}

/// `𝒜 = [[−αR₁WR₁ᵀ, 0, −R₁], [0, −μI_{n−m}, 0], [R₁ᵀ, 0, 0]]`,
/// `B′ = [−Qᵀ; 0]`, `C′ = [Q 0]`, `Δ′(y) = Δ(y) − μQ₂Q₂ᵀy`.
pub fn build_transformed_system_at(
    p: &ProblemInstance,
    mu: f64,
    eq: &Solution,
) -> Result<ErrorSystem> {
    let (n, m) = (p.n(), p.m());
    if m == n {
        return Err(CertifyError::RequiresStrictSubspace(n));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(CertifyError::InvalidParameter(
            "mu",
            format!("must be nonnegative, got {mu}"),
        ));
    }
    check_equilibrium(p, eq)?;
    let qr = p.constraint.qr();
    let r1 = &qr.r1;
    let r1w = match p.penalty_weight() {
        Some(w) => r1.matmul(w),
        None => r1.clone(),
    };
    let mut a = DenseMatrix::zeros(n + m, n + m);
    a.set_block(0, 0, &r1w.matmul(&r1.transpose()).scale(-p.alpha));
    a.set_block(m, m, &DenseMatrix::identity(n - m).scale(-mu));
    a.set_block(0, n, &r1.scale(-1.0));
    a.set_block(n, 0, &r1.transpose());
    let mut b = DenseMatrix::zeros(n + m, n);
    b.set_block(0, 0, &qr.q.transpose().scale(-1.0));
    let mut c = DenseMatrix::zeros(n, n + m);
    c.set_block(0, 0, &qr.q);
    let shift = qr.q2.matmul(&qr.q2.transpose()).scale(mu);
    Ok(ErrorSystem {
        a,
        b,
        c,
        pi_l: IqcMultiplier::new(p.objective.declared_l)?.l,
        delta: DeltaOracle::new(p.objective.function.clone(), eq.x.clone(), Some(shift)),
        frame: Frame::Transformed,
        equilibrium: eq.clone(),
    })
}

fn check_equilibrium(p: &ProblemInstance, eq: &Solution) -> Result<()> {
    if eq.x.len() != p.n() || eq.lambda.len() != p.m() {
        return Err(CertifyError::InvalidParameter(
            "equilibrium",
            "wrong dimensions".into(),
        ));
    }
    Ok(())
}

/// Outcome of sampling the co-coercivity inequality
/// `(u₁ − u₂)ᵀ(y₁ − y₂) ≥ (1/l)‖u₁ − u₂‖²` for the system's `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqcAudit {
    /// Smallest `(u₁ − u₂)ᵀ(y₁ − y₂) − (1/l)‖u₁ − u₂‖²`, relative to `‖y₁ − y₂‖²`.
    pub worst_slack: f64,
    pub pairs: usize,
    pub passed: bool,
}

/// Samples pairs of outputs `y` in `bounds` and checks the IQC pointwise.
pub fn audit_iqc(sys: &ErrorSystem, pairs: usize, bounds: SampleBox, seed: u64) -> IqcAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.delta.dim();
    let inv_l = 1.0 / sys.pi_l;
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let y1 = bounds.sample(&mut rng, n);
        let y2 = bounds.sample(&mut rng, n);
        let dy = sub(&y1, &y2);
        let scale = dot(&dy, &dy);
        if scale == 0.0 {
            continue;
        }
        let du = sub(&sys.delta.eval(&y1), &sys.delta.eval(&y2));
        let slack = (dot(&du, &dy) - inv_l * norm2(&du).powi(2)) / scale;
        worst = worst.min(slack);
    }
    IqcAudit {
        worst_slack: worst,
        pairs,
        passed: worst >= -1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{library_instance, ConvexityClass, EqualityConstraint, ObjectiveOracle};

    fn scalar_instance(l: f64) -> ProblemInstance {
        let f = Function::Quadratic {
            h: DenseMatrix::from_diag(&[l]),
            c: None,
        };
        let o = ObjectiveOracle::new(f, l, l, ConvexityClass::Convex).unwrap();
        let c = EqualityConstraint::new(DenseMatrix::identity(1), vec![0.0]).unwrap();
        ProblemInstance::new(
            "scalar",
            o,
            c,
            1.0,
            Some(Solution {
                x: vec![0.0],
                lambda: vec![0.0],
            }),
        )
        .unwrap()
    }

    #[test]
    fn scalar_error_system_blocks() {
        let sys = build_error_system(&scalar_instance(2.0)).unwrap();
        assert_eq!(sys.a.to_rows(), vec![vec![-1.0, -1.0], vec![1.0, 0.0]]);
        assert_eq!(sys.b.to_rows(), vec![vec![-1.0], vec![0.0]]);
        assert_eq!(sys.c.to_rows(), vec![vec![1.0, 0.0]]);
        assert_eq!(sys.delta.eval(&[0.0]), vec![0.0]);
        assert_eq!(sys.delta.eval(&[1.5]), vec![3.0]);
    }

    #[test]
    fn transformed_blocks_for_axis_constraint() {
        let p = library_instance("partially_strongly_convex").unwrap();
        let sys = build_transformed_system(&p, 1.0).unwrap();
        let expect = vec![
            vec![-1.0, 0.0, -1.0],
            vec![0.0, -1.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ];
        assert!(
            sys.a
                .sub(&DenseMatrix::from_rows(&expect).unwrap())
                .max_abs()
                < 1e-14
        );
    }

    #[test]
    fn transformed_frame_rejects_square_constraints() {
        let p = library_instance("zero_objective_square").unwrap();
        assert_eq!(
            build_transformed_system(&p, 0.5).unwrap_err(),
            CertifyError::RequiresStrictSubspace(2)
        );
        let q = library_instance("strongly_convex_quadratic").unwrap();
        assert!(build_transformed_system(&q, -1.0).is_err());
    }

    #[test]
    fn transformed_delta_matches_finite_differences() {
        // Quadratic f: Δ′ is linear with matrix H − μQ₂Q₂ᵀ.
        let p = library_instance("strongly_convex_quadratic").unwrap();
        let mu = 0.7;
        let sys = build_transformed_system(&p, mu).unwrap();
        let q2 = &p.constraint.qr().q2;
        let expect = DenseMatrix::identity(2).sub(&q2.matmul(&q2.transpose()).scale(mu));
        let y = [0.3, -1.1];
        let h = 1e-6;
        for j in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[j] += h;
            ym[j] -= h;
            let col = sub(&sys.delta.eval(&yp), &sys.delta.eval(&ym));
            for i in 0..2 {
                assert!((col[i] / (2.0 * h) - expect[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn iqc_audit_flags_nonconvex_delta() {
        let sys = build_error_system(&scalar_instance(1.0)).unwrap();
        assert!(audit_iqc(&sys, 200, SampleBox::default(), 1).passed);
        let f = Function::Quadratic {
            h: DenseMatrix::from_diag(&[-1.0]),
            c: None,
        };
        let o = ObjectiveOracle::new(f, 1.0, 0.0, ConvexityClass::Custom).unwrap();
        let c = EqualityConstraint::new(DenseMatrix::identity(1), vec![0.0]).unwrap();
        let p = ProblemInstance::new("concave", o, c, 1.0, None).unwrap();
        let sys = build_error_system(&p).unwrap();
        assert!(!audit_iqc(&sys, 200, SampleBox::default(), 1).passed);
    }
}
