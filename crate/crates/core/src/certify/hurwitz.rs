use serde::{Deserialize, Serialize};

use super::{CertifyError, Result};
use crate::linalg::{qr_decompose, spectral_abscissa, symmetric_eigen, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurwitzVerdict {
    /// `F + Fᵀ ≻ 0` and `T` has full row rank.
    pub structural: bool,
    /// Spectral abscissa of `[[−F, −Tᵀ], [T, 0]]`.
    pub abscissa: f64,
}

impl HurwitzVerdict {
    pub fn is_hurwitz(&self) -> bool {
        self.abscissa < 0.0
    }
}

/// Checks the hypotheses `F ≻ 0` and `rank T = m` and computes the spectral
/// abscissa of the saddle matrix they guarantee to be Hurwitz.
pub fn hurwitz_check(f_block: &DenseMatrix, t: &DenseMatrix) -> Result<HurwitzVerdict> {
    let n = f_block.rows();
    if !f_block.is_square() || t.cols() != n || t.rows() > n || t.rows() == 0 {
        return Err(CertifyError::InvalidParameter(
            "t",
            format!(
                "need F n×n and T m×n with 1 ≤ m ≤ n, got F {}×{}, T {}×{}",
                f_block.rows(),
                f_block.cols(),
                t.rows(),
                t.cols()
            ),
        ));
    }
    let m = t.rows();
    let sym = f_block.symmetric_part();
    let min_eig = symmetric_eigen(&sym)?.values[0];
    let pd = min_eig > 1e-12 * sym.max_abs().max(1.0);
    let full_rank = qr_decompose(&t.transpose()).is_ok();
    let tt = t.transpose();
    let neg_f = f_block.scale(-1.0);
    let neg_tt = tt.scale(-1.0);
    let a = DenseMatrix::from_blocks(&[
        vec![Some(&neg_f), Some(&neg_tt)],
        vec![Some(t), Some(&DenseMatrix::zeros(m, m))],
    ])?;
    let abscissa = spectral_abscissa(&a)?;
    Ok(HurwitzVerdict {
        structural: pd && full_rank,
        abscissa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_structural_case() {
        let v = hurwitz_check(&DenseMatrix::identity(1), &DenseMatrix::identity(1)).unwrap();
        assert!(v.structural);
        assert!((v.abscissa + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_f_is_skew() {
        let v = hurwitz_check(&DenseMatrix::zeros(1, 1), &DenseMatrix::identity(1)).unwrap();
        assert!(!v.structural);
        assert!(v.abscissa.abs() < 1e-12);
    }

    #[test]
    fn rectangular_constraint() {
        // Characteristic polynomial (s + 1)(s² + s + 1): roots −1 and −½ ± j√3/2.
        let t = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let v = hurwitz_check(&DenseMatrix::identity(2), &t).unwrap();
        assert!(v.structural);
        assert!((v.abscissa + 0.5).abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_constraint_fails_structurally() {
        let t = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let v = hurwitz_check(&DenseMatrix::identity(2), &t).unwrap();
        assert!(!v.structural);
    }
}
