use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ObjectiveOracle, ProblemError, Result};
use crate::linalg::{dot, norm2, sub};

/// Axis-aligned sampling box `[lo, hi]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
        }
    }
}

impl SampleBox {
    pub fn sample(&self, rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(self.lo..=self.hi)).collect()
    }
}

/// Empirical extremes of the monotonicity quotient
/// `(∇f(x)−∇f(y))ᵀ(x−y)/‖x−y‖²` and the co-coercivity quotient
/// `‖∇f(x)−∇f(y)‖²/(∇f(x)−∇f(y))ᵀ(x−y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessEstimate {
    /// Largest monotonicity quotient seen.
    pub l_hat: f64,
    /// Smallest monotonicity quotient seen.
    pub mu_hat: f64,
    /// Largest co-coercivity quotient over pairs with positive curvature; 0 if none.
    pub cocoercivity_hat: f64,
    pub pairs: usize,
}

pub const MIN_AUDIT_SAMPLES: usize = 100;

/// Samples `samples` random pairs in `bounds` and audits the declared `l`.
pub fn estimate_smoothness(
    o: &ObjectiveOracle,
    samples: usize,
    bounds: SampleBox,
    seed: u64,
) -> Result<SmoothnessEstimate> {
    if samples < MIN_AUDIT_SAMPLES {
        return Err(ProblemError::InvalidParameter {
            name: "samples",
            reason: format!("need at least {MIN_AUDIT_SAMPLES}, got {samples}"),
        });
    }
    let n = o.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = SmoothnessEstimate {
        l_hat: f64::NEG_INFINITY,
        mu_hat: f64::INFINITY,
        cocoercivity_hat: 0.0,
        pairs: 0,
    };
    let mut witness = None;
    for _ in 0..samples {
        let x = bounds.sample(&mut rng, n);
        let y = bounds.sample(&mut rng, n);
        let dx = sub(&x, &y);
        let dx2 = dot(&dx, &dx);
        if dx2 == 0.0 {
            continue;
        }
        let dg = sub(&o.gradient(&x), &o.gradient(&y));
        let curvature = dot(&dg, &dx);
        let q = curvature / dx2;
        if q > est.l_hat {
            est.l_hat = q;
            witness = Some((x.clone(), y.clone()));
        }
        est.mu_hat = est.mu_hat.min(q);
        if curvature > 1e-12 * dx2 {
            est.cocoercivity_hat = est.cocoercivity_hat.max(dot(&dg, &dg) / curvature);
        }
        est.pairs += 1;
    }
    if est.l_hat > o.declared_l + 1e-6 {
        let (x, y) = witness.expect("witness recorded with l_hat");
        return Err(ProblemError::DeclarationViolated {
            x,
            y,
            quotient: est.l_hat,
            declared: o.declared_l,
        });
    }
    Ok(est)
}

/// Smallest restricted-secant quotient `∇f(x)ᵀ(x − x_p)/‖x − x_p‖²` over the
/// given points, relative to a known minimizer `x_p`. Points equal to `x_p`
/// are skipped.
pub fn estimate_rsi_mu<I>(o: &ObjectiveOracle, minimizer: &[f64], points: I) -> f64
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let g_p = o.gradient(minimizer);
    points
        .into_iter()
        .filter_map(|x| {
            let d = sub(&x, minimizer);
            let d2 = dot(&d, &d);
            (d2 > 0.0).then(|| dot(&sub(&o.gradient(&x), &g_p), &d) / d2)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest relative discrepancy between the analytic gradient and central
/// finite differences of the value, over `points` random points.
pub fn gradient_check(o: &ObjectiveOracle, points: usize, bounds: SampleBox, seed: u64) -> f64 {
    let n = o.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..points {
        let x = bounds.sample(&mut rng, n);
        let g = o.gradient(&x);
        let scale = 1.0 + norm2(&g);
        let mut xp = x.clone();
        for i in 0..n {
            let h = 1e-6 * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let fp = o.value(&xp);
            xp[i] = x[i] - h;
            let fm = o.value(&xp);
            xp[i] = x[i];
            let fd = (fp - fm) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / scale);
        }
    }
    worst
}
