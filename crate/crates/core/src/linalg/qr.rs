use super::{DenseMatrix, LinalgError, Result};

/// Full QR factorization `Tᵀ = Q [R₁; 0] = Q₁ R₁` of an `n×m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    /// `n×n` orthogonal factor.
    pub q: DenseMatrix,
    /// `m×m` upper triangular factor with nonnegative diagonal.
    pub r1: DenseMatrix,
    /// First `m` columns of `q`, spanning the range of the input.
    pub q1: DenseMatrix,
    /// Remaining `n−m` columns of `q`, spanning the orthogonal complement.
    pub q2: DenseMatrix,
}

/// Householder QR of a tall `n×m` matrix (`n ≥ m`).
///
/// Reflectors follow the LAPACK `dlarfg` convention: a column whose
/// subdiagonal part is already zero gets the identity reflector. The signs
/// are normalised afterwards so that `diag(R₁) ≥ 0`.
pub fn qr_decompose(a: &DenseMatrix) -> Result<QrFactors> {
    let (n, m) = (a.rows(), a.cols());
    if m > n {
        return Err(LinalgError::DimensionMismatch(format!(
            "QR needs rows >= cols, got {n}x{m}"
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let scale = a.max_abs();
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(n);

    for k in 0..m {
        let alpha = r[(k, k)];
        let tail_sq: f64 = ((k + 1)..n).map(|i| r[(i, k)] * r[(i, k)]).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let norm = (alpha * alpha + tail_sq).sqrt();
        let beta = if alpha >= 0.0 { -norm } else { norm };
        // v = x − beta·e₁, stored with v₀ = alpha − beta.
        let mut v = vec![0.0; n - k];
        v[0] = alpha - beta;
        for i in (k + 1)..n {
            v[i - k] = r[(i, k)];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        let tau = 2.0 / vnorm_sq;

        // R ← H R on rows k.., columns k..
        for j in k..m {
            let s: f64 = (k..n).map(|i| v[i - k] * r[(i, j)]).sum();
            let s = tau * s;
            for i in k..n {
                r[(i, j)] -= s * v[i - k];
            }
        }
        for i in (k + 1)..n {
            r[(i, k)] = 0.0;
        }
        r[(k, k)] = beta;

        // Q ← Q H on columns k..
        for i in 0..n {
            let s: f64 = (k..n).map(|c| q[(i, c)] * v[c - k]).sum();
            let s = tau * s;
            for c in k..n {
                q[(i, c)] -= s * v[c - k];
            }
        }
    }

    let mut r1 = r.block(0, m, 0, m);
    for k in 0..m {
        if r1[(k, k)] < 0.0 {
            for j in 0..m {
                r1[(k, j)] = -r1[(k, j)];
            }
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    // Exact zeros below the diagonal.
    for i in 0..m {
        for j in 0..i {
            r1[(i, j)] = 0.0;
        }
    }
    let threshold = 1e-12 * scale;
    for k in 0..m {
        let d = r1[(k, k)].abs();
        if d < threshold || d == 0.0 {
            return Err(LinalgError::RankDeficient {
                index: k,
                value: d,
                threshold,
            });
        }
    }
    let q1 = q.block(0, n, 0, m);
    let q2 = q.block(0, n, m, n);
    Ok(QrFactors { q, r1, q1, q2 })
}
