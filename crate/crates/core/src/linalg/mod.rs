//! Dense real and complex linear algebra used throughout the crate.
//!
//! Everything here works on small dense matrices (up to a few hundred rows)
//! and is written for clarity rather than cache efficiency: Householder QR,
//! cyclic Jacobi for symmetric spectra, Hessenberg reduction plus Francis
//! double-shift QR for nonsymmetric spectra, and partial-pivoted LU for
//! real and complex systems.

mod complex;
mod dense;
mod eigen;
mod qr;

pub use complex::{
    complex_solve, hermitian_max_eigenvalue, hermitian_min_eigenvalue, ComplexMatrix,
};
pub use dense::DenseMatrix;
pub use eigen::{eigenvalues, spectral_abscissa, symmetric_eigen, SymmetricEigen};
pub use qr::{qr_decompose, QrFactors};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("rank deficient: |R[{index}][{index}]| = {value:.3e} below threshold {threshold:.3e}")]
    RankDeficient {
        index: usize,
        value: f64,
        threshold: f64,
    },
    #[error("QR iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("singular matrix: pivot {pivot:.3e} at column {column}")]
    Singular { column: usize, pivot: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Max-abs norm of a slice.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn norm2(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
