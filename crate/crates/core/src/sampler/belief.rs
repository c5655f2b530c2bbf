use serde::{Deserialize, Serialize};

use super::{valid_points, Measurement, SamplerConfig, SamplerError, SamplingGeometry};

/// Strength estimate over the candidate locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub candidates: Vec<f64>,
    pub mean: Vec<f64>,
    pub uncertainty: Vec<f64>,
}

impl Belief {
    /// Mean at an arbitrary location, linear between candidates.
    pub fn mean_at(&self, x: f64) -> f64 {
        let points: Vec<(f64, f64)> = self.candidates.iter().copied().zip(self.mean.iter().copied()).collect();
        interpolate(&points, x)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    match points {
        [] => f64::NAN,
        [only] => only.1,
        _ => {
            let first = points[0];
            let last = points[points.len() - 1];
            if x <= first.0 {
                return first.1;
            }
            if x >= last.0 {
                return last.1;
            }
            let i = points.partition_point(|p| p.0 <= x);
            let (x0, y0) = points[i - 1];
            let (x1, y1) = points[i];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

/// Linear interpolation between bracketing measurements, flat beyond the
/// outermost ones. Uncertainty grows linearly with distance to the nearest
/// measurement.
pub fn update_belief(
    measurements: &[Measurement],
    geometry: &SamplingGeometry,
    config: &SamplerConfig,
) -> Result<Belief, SamplerError> {
    let points = valid_points(measurements);
    if points.is_empty() {
        return Err(SamplerError::State(
            "belief needs at least one valid measurement".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let candidates = geometry.candidates.clone();
    let mean = candidates.iter().map(|&x| interpolate(&points, x)).collect();
    let uncertainty = candidates
        .iter()
        .map(|&x| config.sigma_floor + config.sigma_scale * nearest_distance(&xs, x))
        .collect();
    Ok(Belief {
        candidates,
        mean,
        uncertainty,
    })
}

/// Distance from `x` to the closest of the sorted `xs`; infinite when empty.
pub(crate) fn nearest_distance(xs: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v < x);
    let right = xs.get(i).map(|v| v - x);
    let left = i.checked_sub(1).map(|j| x - xs[j]);
    match (left, right) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::tests::measured;

    fn belief(points: &[(f64, f64)]) -> Belief {
        update_belief(
            &measured(points),
            &SamplingGeometry::uniform(10.0, 21),
            &SamplerConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn linear_midpoint() {
        let b = belief(&[(0.0, 10.0), (1.0, 30.0)]);
        assert!((b.mean[10] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn single_measurement_is_constant() {
        let b = belief(&[(0.5, 12.0)]);
        assert!(b.mean.iter().all(|&m| m == 12.0));
    }

    #[test]
    fn uncertainty_floor_at_measurements_and_peak_far_away() {
        let cfg = SamplerConfig::default();
        let b = belief(&[(0.2, 1.0), (0.3, 2.0)]);
        // Brute-force scan: minimum exactly at measured x, maximum at the far end.
        let (imin, _) = b
            .uncertainty
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |a, (i, &u)| if u < a.1 { (i, u) } else { a });
        let (imax, _) = b
            .uncertainty
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |a, (i, &u)| if u > a.1 { (i, u) } else { a });
        assert_eq!(b.candidates[imin], 0.2);
        assert_eq!(b.uncertainty[4], cfg.sigma_floor);
        assert_eq!(b.uncertainty[6], cfg.sigma_floor);
        assert_eq!(b.candidates[imax], 1.0);
    }

    #[test]
    fn needs_a_measurement() {
        let r = update_belief(&[], &SamplingGeometry::uniform(1.0, 5), &SamplerConfig::default());
        assert!(matches!(r, Err(SamplerError::State(_))));
    }

    #[test]
    fn nearest_distance_cases() {
        assert!((nearest_distance(&[0.2, 0.6], 0.5) - 0.1).abs() < 1e-15);
        assert_eq!(nearest_distance(&[], 0.5), f64::INFINITY);
        assert_eq!(nearest_distance(&[0.2], 0.0), 0.2);
    }
}
