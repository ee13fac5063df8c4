use serde::{Deserialize, Serialize};

use super::{DynamicsError, Result, Trajectory};

/// Fraction of the horizon, counted from the end, used for the fit.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.6;
/// Samples at or below this error are treated as round-off and dropped,
/// together with everything after them.
pub const FIT_NOISE_FLOOR: f64 = 1e-11;
const MIN_SAMPLES: usize = 10;
const DECAY_FLOOR: f64 = 1e-12;

/// Least-squares fit of `ln ‖z(t) − z*‖ ≈ ln(ĉ‖z(0) − z*‖) − ρ̂t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rho_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub window_start: f64,
    pub samples: usize,
}

/// Fits an exponential rate to the tail `t ≥ (1 − window_fraction)·t_end` of
/// a sampled error curve.
pub fn fit_rate(times: &[f64], errors: &[f64], window_fraction: f64) -> Result<RateFit> {
    if times.len() != errors.len() {
        return Err(DynamicsError::Dimension(format!(
            "{} times for {} errors",
            times.len(),
            errors.len()
        )));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(DynamicsError::InvalidOption(
            "window_fraction",
            format!("must lie in (0, 1], got {window_fraction}"),
        ));
    }
    if times.len() < MIN_SAMPLES {
        return Err(DynamicsError::InsufficientSamples { count: times.len() });
    }
    let t0 = times[0];
    let t_end = *times.last().unwrap();
    let start_t = t0 + (1.0 - window_fraction) * (t_end - t0);
    let first = times
        .iter()
        .position(|&t| t >= start_t - 1e-12)
        .unwrap_or(times.len() - 1);
    let initial = errors[first];
    if initial < DECAY_FLOOR {
        return Err(DynamicsError::InsufficientDecay { initial });
    }
    let window: Vec<(f64, f64)> = times[first..]
        .iter()
        .zip(&errors[first..])
        .take_while(|(_, &e)| e > FIT_NOISE_FLOOR && e.is_finite())
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    if window.len() < MIN_SAMPLES {
        return Err(DynamicsError::InsufficientSamples {
            count: window.len(),
        });
    }
    let k = window.len() as f64;
    let mean_t = window.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = window.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = window.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let ss_tot: f64 = window.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = window
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    let e0 = errors[0];
    let c_hat = if e0 > 0.0 {
        intercept.exp() / e0
    } else {
        f64::INFINITY
    };
    Ok(RateFit {
        rho_hat: -slope,
        c_hat,
        r_squared,
        window_start: window[0].0,
        samples: window.len(),
    })
}

impl Trajectory {
    /// [`fit_rate`] on the recorded error norms with the default window.
    pub fn fit_rate(&self) -> Result<RateFit> {
        if self.error_norms.is_empty() {
            return Err(DynamicsError::NoReference);
        }
        fit_rate(&self.times, &self.error_norms, DEFAULT_WINDOW_FRACTION)
    }
}
