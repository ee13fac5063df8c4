use super::{DynamicsError, Result};
use crate::linalg::{max_abs, norm2};

pub const DEFAULT_STEP: f64 = 1e-3;
/// `‖z‖` above this aborts an integration.
pub const DIVERGENCE_BOUND: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Classic RK4 with a fixed step; the last step is shortened to land on the horizon.
    Fixed { step: f64 },
    /// RK4 with step doubling; a step is accepted when the two-half-step and
    /// full-step results differ by at most `tolerance·(1 + ‖z‖_∞)`.
    Adaptive { initial_step: f64, tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub horizon: f64,
    pub control: StepControl,
    /// Record every `stride`-th accepted step (the initial and final states are always recorded).
    pub stride: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            control: StepControl::Fixed { step: DEFAULT_STEP },
            stride: 10,
        }
    }
}

impl IntegrateOptions {
    pub fn fixed(horizon: f64, step: f64, stride: usize) -> Self {
        Self {
            horizon,
            control: StepControl::Fixed { step },
            stride,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(DynamicsError::InvalidOption(
                "horizon",
                format!("must be positive, got {}", self.horizon),
            ));
        }
        if self.stride == 0 {
            return Err(DynamicsError::InvalidOption(
                "stride",
                "must be at least 1".into(),
            ));
        }
        let step = match self.control {
            StepControl::Fixed { step } => step,
            StepControl::Adaptive {
                initial_step,
                tolerance,
            } => {
                if !(tolerance.is_finite() && tolerance > 0.0) {
                    return Err(DynamicsError::InvalidOption(
                        "tolerance",
                        "must be positive".into(),
                    ));
                }
                initial_step
            }
        };
        if !(step.is_finite() && step > 0.0) {
            return Err(DynamicsError::InvalidOption(
                "step",
                format!("must be positive, got {step}"),
            ));
        }
        Ok(())
    }
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn step<F>(
        &mut self,
        field: &mut F,
        z: &[f64],
        h: f64,
        out: &mut [f64],
    ) -> std::result::Result<(), ()>
    where
        F: FnMut(&[f64], &mut [f64]) -> std::result::Result<(), ()>,
    {
        field(z, &mut self.k1)?;
        for i in 0..z.len() {
            self.tmp[i] = z[i] + 0.5 * h * self.k1[i];
        }
        field(&self.tmp, &mut self.k2)?;
        for i in 0..z.len() {
            self.tmp[i] = z[i] + 0.5 * h * self.k2[i];
        }
        field(&self.tmp, &mut self.k3)?;
        for i in 0..z.len() {
            self.tmp[i] = z[i] + h * self.k3[i];
        }
        field(&self.tmp, &mut self.k4)?;
        for i in 0..z.len() {
            out[i] =
                z[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

/// Integrates the autonomous system `ż = field(z)` from `z0` over
/// `[0, horizon]`. The field signals a non-finite evaluation by returning
/// `Err(())`. Returns the recorded times and states.
pub fn integrate_field<F>(
    mut field: F,
    z0: &[f64],
    opts: &IntegrateOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: FnMut(&[f64], &mut [f64]) -> std::result::Result<(), ()>,
{
    opts.validate()?;
    let n = z0.len();
    let mut ws = Rk4Workspace::new(n);
    let mut z = z0.to_vec();
    let mut next = vec![0.0; n];
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![z.clone()];
    let mut accepted = 0usize;
    let horizon = opts.horizon;
    // Snap to the horizon when within a tiny fraction of a step.
    let snap = |t: f64, h: f64| horizon - t <= 1e-9 * h;

    match opts.control {
        StepControl::Fixed { step } => {
            let total = ((horizon / step) - 1e-9).ceil().max(1.0) as usize;
            for k in 0..total {
                let t_next = if k + 1 == total {
                    horizon
                } else {
                    (k + 1) as f64 * step
                };
                let h = t_next - t;
                if h <= 0.0 {
                    break;
                }
                ws.step(&mut field, &z, h, &mut next)
                    .map_err(|_| DynamicsError::NonFiniteGradient { t })?;
                std::mem::swap(&mut z, &mut next);
                t = t_next;
                accepted += 1;
                check_state(&z, t)?;
                if accepted.is_multiple_of(opts.stride) || k + 1 == total {
                    times.push(t);
                    states.push(z.clone());
                }
            }
        }
        StepControl::Adaptive {
            initial_step,
            tolerance,
        } => {
            let mut h = initial_step.min(horizon);
            let mut half = vec![0.0; n];
            let mut two_half = vec![0.0; n];
            let mut rejections = 0usize;
            while !snap(t, h) {
                let h_try = h.min(horizon - t);
                let nf = |_| DynamicsError::NonFiniteGradient { t };
                ws.step(&mut field, &z, h_try, &mut next).map_err(nf)?;
                ws.step(&mut field, &z, 0.5 * h_try, &mut half)
                    .map_err(nf)?;
                ws.step(&mut field, &half, 0.5 * h_try, &mut two_half)
                    .map_err(nf)?;
                let diff = two_half
                    .iter()
                    .zip(&next)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / 15.0;
                let allowed = tolerance * (1.0 + max_abs(&z));
                let factor = if diff == 0.0 {
                    4.0
                } else {
                    (0.9 * (allowed / diff).powf(0.2)).clamp(0.1, 4.0)
                };
                if diff <= allowed {
                    std::mem::swap(&mut z, &mut two_half);
                    t += h_try;
                    accepted += 1;
                    rejections = 0;
                    check_state(&z, t)?;
                    let done = snap(t, h_try * factor);
                    if accepted.is_multiple_of(opts.stride) || done {
                        times.push(t);
                        states.push(z.clone());
                    }
                } else {
                    rejections += 1;
                    if rejections > 60 {
                        return Err(DynamicsError::InvalidOption(
                            "tolerance",
                            "step size underflow".into(),
                        ));
                    }
                }
                h = h_try * factor;
            }
            if *times.last().unwrap() < t {
                times.push(t);
                states.push(z.clone());
            }
        }
    }
    Ok((times, states))
}

fn check_state(z: &[f64], t: f64) -> Result<()> {
    let norm = norm2(z);
    if !norm.is_finite() {
        return Err(DynamicsError::NonFiniteGradient { t });
    }
    if norm > DIVERGENCE_BOUND {
        return Err(DynamicsError::Diverged { t, norm });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(rate: f64) -> impl FnMut(&[f64], &mut [f64]) -> std::result::Result<(), ()> {
        move |z: &[f64], dz: &mut [f64]| {
            dz[0] = -rate * z[0];
            Ok(())
        }
    }

    #[test]
    fn fixed_step_lands_on_horizon() {
        let (t, z) = integrate_field(
            decay(1.0),
            &[1.0],
            &IntegrateOptions::fixed(1.0005, 1e-3, 100),
        )
        .unwrap();
        assert_eq!(*t.last().unwrap(), 1.0005);
        assert!((z.last().unwrap()[0] - (-1.0005f64).exp()).abs() < 1e-13);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let opts = IntegrateOptions {
            horizon: 5.0,
            control: StepControl::Adaptive {
                initial_step: 0.1,
                tolerance: 1e-8,
            },
            stride: 1,
        };
        let (t, z) = integrate_field(decay(3.0), &[1.0], &opts).unwrap();
        assert!((t.last().unwrap() - 5.0).abs() < 1e-12);
        assert!((z.last().unwrap()[0] - (-15.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn divergence_guard() {
        let r = integrate_field(
            decay(-20.0),
            &[1.0],
            &IntegrateOptions::fixed(10.0, 1e-3, 10),
        );
        assert!(matches!(r, Err(DynamicsError::Diverged { .. })));
    }

    #[test]
    fn non_finite_field() {
        let field = |_: &[f64], _: &mut [f64]| Err(());
        let r = integrate_field(field, &[1.0], &IntegrateOptions::fixed(1.0, 0.1, 1));
        assert!(matches!(r, Err(DynamicsError::NonFiniteGradient { .. })));
    }

    #[test]
    fn rejects_bad_options() {
        for opts in [
            IntegrateOptions::fixed(0.0, 1e-3, 1),
            IntegrateOptions::fixed(1.0, -1.0, 1),
            IntegrateOptions::fixed(1.0, 0.1, 0),
        ] {
            assert!(matches!(
                integrate_field(decay(1.0), &[1.0], &opts),
                Err(DynamicsError::InvalidOption(..))
            ));
        }
    }
}
