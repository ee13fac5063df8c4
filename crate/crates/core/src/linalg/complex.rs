use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::{symmetric_eigen, DenseMatrix, LinalgError, Result};

/// Row-major dense complex matrix, used for transfer-function evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(m: &DenseMatrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| Complex64::new(m[(i, j)], 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn shift_diag(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += s;
        }
        out
    }

    /// `‖H − H*‖_max`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `m · X = rhs` by Gaussian elimination with partial pivoting.
pub fn complex_solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows != m.cols {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if rhs.rows != m.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "rhs has {} rows, matrix has {}",
            rhs.rows, m.rows
        )));
    }
    if !m.is_finite() || !rhs.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows;
    let k_rhs = rhs.cols;
    let threshold = 1e-13 * m.max_abs();
    let mut a = m.clone();
    let mut x = rhs.clone();
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot < threshold || pivot == 0.0 {
            return Err(LinalgError::Singular { column: k, pivot });
        }
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            for j in 0..k_rhs {
                x.data.swap(k * k_rhs + j, p * k_rhs + j);
            }
        }
        let akk = a[(k, k)];
        for i in (k + 1)..n {
            let factor = a[(i, k)] / akk;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in k..n {
                let akj = a[(k, j)];
                a[(i, j)] -= factor * akj;
            }
            for j in 0..k_rhs {
                let xkj = x[(k, j)];
                x[(i, j)] -= factor * xkj;
            }
        }
    }
    for k in (0..n).rev() {
        let akk = a[(k, k)];
        for j in 0..k_rhs {
            let mut s = x[(k, j)];
            for c in (k + 1)..n {
                s -= a[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = s / akk;
        }
    }
    Ok(x)
}

/// Ascending eigenvalues of a Hermitian matrix.
///
/// Uses the real symmetric embedding `[[Re, −Im], [Im, Re]]`, whose spectrum
/// is that of `H` with every eigenvalue doubled; every second value is kept.
fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if h.rows != h.cols {
        return Err(LinalgError::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    if !h.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let defect = h.hermitian_defect();
    if defect > 1e-9 * h.max_abs() {
        return Err(LinalgError::NotHermitian { asymmetry: defect });
    }
    let n = h.rows;
    // Average with the adjoint so the embedding is exactly symmetric.
    let hs = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj()));
    let embed = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = hs[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = symmetric_eigen(&embed)?;
    Ok(eig.values.into_iter().step_by(2).collect())
}

pub fn hermitian_min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

pub fn hermitian_max_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?
        .last()
        .copied()
        .unwrap_or(f64::NEG_INFINITY))
}
