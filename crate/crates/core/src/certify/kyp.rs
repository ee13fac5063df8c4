use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CertifyError, ErrorSystem, Frame, Result};
use crate::linalg::{complex_solve, hermitian_max_eigenvalue, spectral_abscissa, ComplexMatrix};

/// Default acceptance tolerance on the KYP margin.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Largest admissible `ρ` as a fraction of the abscissa of `−A`.
const RHO_CAP: f64 = 0.999;
/// Bisection stops when `(hi − lo) ≤ BISECTION_WIDTH·hi`.
const BISECTION_WIDTH: f64 = 1e-3;
const MIN_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Log,
}

/// Frequencies `{0} ∪ logspace(min, max, points)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1e4,
            points: MIN_GRID_POINTS,
            scale: GridScale::Log,
        }
    }
}

impl FrequencyGrid {
    pub fn with_points(points: usize) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(CertifyError::InvalidParameter(
                "grid",
                format!("need 0 < min < max, got [{}, {}]", self.min, self.max),
            ));
        }
        if self.points < MIN_GRID_POINTS {
            return Err(CertifyError::InvalidParameter(
                "rho_grid_points",
                format!(
                    "need at least {MIN_GRID_POINTS} points, got {}",
                    self.points
                ),
            ));
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        let (a, b) = (self.min.log10(), self.max.log10());
        let k = (self.points - 1) as f64;
        std::iter::once(0.0)
            .chain((0..self.points).map(|i| 10f64.powf(a + (b - a) * i as f64 / k)))
            .collect()
    }
}

/// Largest eigenvalue of `[G; I]* Π [G; I] = l(G + G*) − 2I` at
/// `G = C(jωI − A − ρI)⁻¹B`. Nonpositive values mean the frequency-domain
/// inequality holds at `ω`.
pub fn kyp_margin(sys: &ErrorSystem, rho: f64, omega: f64) -> Result<f64> {
    let n = sys.a.rows();
    let mut m = ComplexMatrix::from_real(&sys.a.shift_diag(rho)).scale(-1.0);
    for i in 0..n {
        m[(i, i)] += Complex64::new(0.0, omega);
    }
    let x = complex_solve(&m, &ComplexMatrix::from_real(&sys.b))?;
    let g = ComplexMatrix::from_real(&sys.c).matmul(&x);
    let h = g.add(&g.adjoint()).scale(sys.pi_l).shift_diag(-2.0);
    Ok(hermitian_max_eigenvalue(&h)?)
}

/// Result of a successful certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub rho_certified: f64,
    /// Spectral abscissa of `−A`, i.e. `−max Re λ(A)`.
    pub abscissa: f64,
    pub tolerance: f64,
    pub grid: FrequencyGrid,
    pub worst_margin: f64,
    pub worst_omega: f64,
    pub frame: Frame,
}

/// `(max margin, argmax ω)` over the grid at `rho`; a singular resolvent
/// makes the point infeasible.
fn sweep(sys: &ErrorSystem, rho: f64, omegas: &[f64]) -> (f64, f64) {
    let margins: Vec<f64> = omegas
        .par_iter()
        .map(|&w| kyp_margin(sys, rho, w).unwrap_or(f64::INFINITY))
        .collect();
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for (&w, &v) in omegas.iter().zip(&margins) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > worst.0 {
            worst = (v, w);
        }
    }
    worst
}

/// Bisects for the largest `ρ ∈ [0, 0.999·abscissa]` at which the KYP
/// margin stays below `tol` on every grid frequency.
///
/// The grid is finite; beyond `grid.max` the margin tends to `−2` because
/// `G_ρ` is strictly proper.
pub fn certify_rate(sys: &ErrorSystem, grid: &FrequencyGrid, tol: f64) -> Result<RateCertificate> {
    grid.validate()?;
    let max_re = spectral_abscissa(&sys.a)?;
    if max_re >= 0.0 {
        return Err(CertifyError::NotHurwitz { abscissa: max_re });
    }
    let abscissa = -max_re;
    let omegas = grid.omegas();
    let base = sweep(sys, 0.0, &omegas);
    if base.0 > tol {
        return Err(CertifyError::NotCertifiable {
            worst_margin: base.0,
            worst_omega: base.1,
            tolerance: tol,
        });
    }
    let mut lo = (0.0, base);
    let mut hi = RHO_CAP * abscissa;
    let top = sweep(sys, hi, &omegas);
    if top.0 <= tol {
        lo = (hi, top);
    } else {
        while hi - lo.0 > BISECTION_WIDTH * hi {
            let mid = 0.5 * (lo.0 + hi);
            let s = sweep(sys, mid, &omegas);
            if s.0 <= tol {
                lo = (mid, s);
            } else {
                hi = mid;
            }
        }
    }
    let (rho, (worst_margin, worst_omega)) = lo;
    log::debug!("certified rho = {rho:.6e} (abscissa {abscissa:.6e}, worst margin {worst_margin:.3e} at omega {worst_omega:.3e})");
    Ok(RateCertificate {
        rho_certified: rho,
        abscissa,
        tolerance: tol,
        grid: *grid,
        worst_margin,
        worst_omega,
        frame: sys.frame,
    })
}
