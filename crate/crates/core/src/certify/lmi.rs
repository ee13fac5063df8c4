use super::{CertifyError, ErrorSystem, Result};
use crate::linalg::{symmetric_eigen, DenseMatrix};

/// Largest eigenvalue of
/// `[[A_ρᵀP + PA_ρ, PB], [BᵀP, 0]] + [C 0; 0 I]ᵀ Π [C 0; 0 I]`
/// with `A_ρ = A + ρI`. Nonpositive values certify the rate `ρ` with
/// storage `zᵀPz`. The candidate `P` is supplied, not searched for.
pub fn lmi_residual(sys: &ErrorSystem, rho: f64, p: &DenseMatrix) -> Result<f64> {
    residual(sys, rho, p, true)
}

/// Same block matrix with `Π = 0`.
pub fn lmi_residual_without_multiplier(
    sys: &ErrorSystem,
    rho: f64,
    p: &DenseMatrix,
) -> Result<f64> {
    residual(sys, rho, p, false)
}

fn residual(sys: &ErrorSystem, rho: f64, p: &DenseMatrix, with_pi: bool) -> Result<f64> {
    let nz = sys.a.rows();
    let nu = sys.b.cols();
    if p.rows() != nz || p.cols() != nz {
        return Err(CertifyError::InvalidParameter(
            "p_candidate",
            format!("expected {nz}×{nz}, got {}×{}", p.rows(), p.cols()),
        ));
    }
    let asym = p.asymmetry();
    if asym > 1e-10 * p.max_abs().max(1.0) {
        return Err(crate::linalg::LinalgError::NotSymmetric { asymmetry: asym }.into());
    }
    let a_rho = sys.a.shift_diag(rho);
    let top_left = a_rho.transpose().matmul(p).add(&p.matmul(&a_rho));
    let pb = p.matmul(&sys.b);
    let mut m = DenseMatrix::zeros(nz + nu, nz + nu);
    m.set_block(0, 0, &top_left);
    m.set_block(0, nz, &pb);
    m.set_block(nz, 0, &pb.transpose());
    if with_pi {
        // [C 0; 0 I]ᵀ [[0, lI], [lI, −2I]] [C 0; 0 I] = [[0, lCᵀ], [lC, −2I]].
        let lc = sys.c.scale(sys.pi_l);
        let mut pi = DenseMatrix::zeros(nz + nu, nz + nu);
        pi.set_block(0, nz, &lc.transpose());
        pi.set_block(nz, 0, &lc);
        pi.set_block(nz, nz, &DenseMatrix::identity(nu).scale(-2.0));
        m = m.add(&pi);
    }
    Ok(*symmetric_eigen(&m.symmetric_part())?
        .values
        .last()
        .expect("nonempty"))
}
