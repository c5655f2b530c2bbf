use serde::{Deserialize, Serialize};

use super::{ForceDepthCurve, IntruderSpec, IntrusionError};
use crate::terrain::{EnvironmentConfig, MaterialColumn};

pub const MIN_FIT_SAMPLES: usize = 10;
pub const DEFAULT_RUPTURE_WINDOW: usize = 5;
/// Relative RMS residual above which a post-transient K fit is not trusted.
const K_FIT_RESIDUAL_LIMIT: f64 = 0.05;
const THRESHOLDS_N: [f64; 3] = [10.0, 20.0, 30.0];

/// Slope of `F = k h` through the origin, least squares over the whole curve.
pub fn fit_stiffness(curve: &ForceDepthCurve) -> Result<f64, IntrusionError> {
    if curve.len() < MIN_FIT_SAMPLES {
        return Err(IntrusionError::Analysis(format!(
            "stiffness fit needs {MIN_FIT_SAMPLES} samples, got {}",
            curve.len()
        )));
    }
    origin_slope(curve).ok_or_else(|| IntrusionError::Analysis("all depths are zero".into()))
}

fn origin_slope(curve: &ForceDepthCurve) -> Option<f64> {
    let (hf, hh) = curve
        .samples()
        .fold((0.0, 0.0), |(hf, hh), (h, f)| (hf + h * f, hh + h * h));
    (hh > 0.0).then(|| hf / hh)
}

/// Ordinary least squares line through `(x, y)`: returns (slope, intercept).
pub(crate) fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (sxy, sxx) = x.iter().zip(y).fold((0.0, 0.0), |(sxy, sxx), (xi, yi)| {
        (sxy + (xi - mx) * (yi - my), sxx + (xi - mx) * (xi - mx))
    });
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// RMS residual of a line fit divided by the mean absolute force.
pub(crate) fn relative_residual(x: &[f64], y: &[f64], slope: f64, intercept: f64) -> f64 {
    let n = x.len() as f64;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    let scale = y.iter().map(|v| v.abs()).sum::<f64>() / n;
    if scale > 0.0 {
        (ss / n).sqrt() / scale
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KFit {
    pub k: f64,
    /// Post-transient slope, N/m.
    pub slope: f64,
    /// RMS residual of the post-transient line relative to mean force.
    pub relative_residual: f64,
    pub samples_used: usize,
    /// The curve does not look linear past the cone transient.
    pub low_confidence: bool,
}

/// Recover the Archimedes constant from the linear part of a curve.
///
/// Samples inside the stagnant-cone transient (`h <= r tan θ`) are dropped;
/// the remaining slope equals `K φ ρ_p g A`.
pub fn fit_k(
    curve: &ForceDepthCurve,
    intruder: &IntruderSpec,
    column: &MaterialColumn,
    env: &EnvironmentConfig,
) -> Result<KFit, IntrusionError> {
    let cone_h = intruder.cone_height(column.friction_angle);
    let (x, y): (Vec<f64>, Vec<f64>) = curve.samples().filter(|&(h, _)| h > cone_h).unzip();
    if x.len() < MIN_FIT_SAMPLES {
        return Err(IntrusionError::Analysis(format!(
            "K fit needs {MIN_FIT_SAMPLES} samples past the cone transient, got {}",
            x.len()
        )));
    }
    let (slope, intercept) =
        line_fit(&x, &y).ok_or_else(|| IntrusionError::Analysis("degenerate depth range".into()))?;
    let relative_residual = relative_residual(&x, &y, slope, intercept);
    if slope <= 0.0 {
        return Err(IntrusionError::Analysis(format!(
            "post-transient slope {slope} is not positive"
        )));
    }
    let k = slope / (column.phi * column.rho_p * env.gravity * intruder.area());
    Ok(KFit {
        k,
        slope,
        relative_residual,
        samples_used: x.len(),
        low_confidence: relative_residual > K_FIT_RESIDUAL_LIMIT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuptureEvent {
    /// Depth of the peak before the drop, m.
    pub depth: f64,
    /// N
    pub drop_magnitude: f64,
    #[serde(skip)]
    pub(crate) index: usize,
}

pub fn detect_ruptures(curve: &ForceDepthCurve, min_drop: f64) -> Vec<RuptureEvent> {
    detect_ruptures_with_window(curve, min_drop, DEFAULT_RUPTURE_WINDOW)
}

/// Sudden drops: a local maximum followed, within `window` samples, by a
/// monotone decrease of at least `min_drop`. Events are at least `window`
/// samples apart.
pub fn detect_ruptures_with_window(curve: &ForceDepthCurve, min_drop: f64, window: usize) -> Vec<RuptureEvent> {
    let f = &curve.force;
    let window = window.max(1);
    let mut events = Vec::new();
    if f.len() < 2 || !(min_drop > 0.0) {
        return events;
    }
    let mut i = 0;
    while i + 1 < f.len() {
        let is_peak = (i == 0 || f[i] >= f[i - 1]) && f[i] > f[i + 1];
        if !is_peak {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end + 1 < f.len() && end < i + window && f[end + 1] <= f[end] {
            end += 1;
        }
        let drop = f[i] - f[end];
        if drop >= min_drop {
            events.push(RuptureEvent {
                depth: curve.depth[i],
                drop_magnitude: drop,
                index: i,
            });
            i += window + 1;
        } else {
            i += 1;
        }
    }
    events
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthSummary {
    /// First depth where the force reaches 10 N; `None` if never.
    pub depth_at_10n: Option<f64>,
    pub depth_at_20n: Option<f64>,
    pub depth_at_30n: Option<f64>,
    /// Mean of the last five samples, N.
    pub terminal_force: f64,
    /// One-way spring stiffness, N/m.
    pub fitted_k: f64,
}

impl StrengthSummary {
    pub fn thresholds(&self) -> [Option<f64>; 3] {
        [self.depth_at_10n, self.depth_at_20n, self.depth_at_30n]
    }
}

/// First depth at which the force reaches `threshold`, interpolated linearly
/// between the bracketing samples.
pub(crate) fn first_crossing(curve: &ForceDepthCurve, threshold: f64) -> Option<f64> {
    let f = &curve.force;
    let h = &curve.depth;
    let i = f.iter().position(|&v| v >= threshold)?;
    if i == 0 {
        return Some(h[0]);
    }
    let t = (threshold - f[i - 1]) / (f[i] - f[i - 1]);
    Some(h[i - 1] + t * (h[i] - h[i - 1]))
}

pub fn strength_summary(curve: &ForceDepthCurve) -> StrengthSummary {
    let [d10, d20, d30] = THRESHOLDS_N.map(|t| first_crossing(curve, t));
    let tail = &curve.force[curve.len().saturating_sub(5)..];
    let terminal_force = if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    StrengthSummary {
        depth_at_10n: d10,
        depth_at_20n: d20,
        depth_at_30n: d30,
        terminal_force,
        fitted_k: origin_slope(curve).unwrap_or(0.0),
    }
}
