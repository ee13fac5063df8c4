use super::{ProblemError, Result};
use crate::linalg::{qr_decompose, symmetric_eigen, DenseMatrix, QrFactors};

/// Linear equality constraint `T x = b` with `T` of full row rank.
#[derive(Debug, Clone)]
pub struct EqualityConstraint {
    t: DenseMatrix,
    b: Vec<f64>,
    qr: QrFactors,
    kappa1: f64,
    kappa2: f64,
}

impl EqualityConstraint {
    /// Validates the constraint, factors `Tᵀ` and computes the extreme
    /// eigenvalues `κ₁ ≤ λ(TTᵀ) ≤ κ₂`.
    pub fn new(t: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        let (m, n) = (t.rows(), t.cols());
        if m == 0 {
            return Err(ProblemError::Dimension(
                "constraint needs at least one row".into(),
            ));
        }
        if m > n {
            return Err(ProblemError::Dimension(format!(
                "constraint has {m} rows but only {n} variables"
            )));
        }
        if b.len() != m {
            return Err(ProblemError::Dimension(format!(
                "b has length {}, expected {m}",
                b.len()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidParameter {
                name: "b",
                reason: "must be finite".into(),
            });
        }
        let qr = qr_decompose(&t.transpose())?;
        let gram = t.matmul(&t.transpose());
        let eig = symmetric_eigen(&gram)?;
        let kappa1 = eig.values[0];
        let kappa2 = eig.values[m - 1];
        Ok(Self {
            t,
            b,
            qr,
            kappa1,
            kappa2,
        })
    }

    pub fn t(&self) -> &DenseMatrix {
        &self.t
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn qr(&self) -> &QrFactors {
        &self.qr
    }

    pub fn rows(&self) -> usize {
        self.t.rows()
    }

    pub fn cols(&self) -> usize {
        self.t.cols()
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    /// `T x − b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.t.matvec(x);
        r.iter_mut().zip(&self.b).for_each(|(ri, bi)| *ri -= bi);
        r
    }
}
