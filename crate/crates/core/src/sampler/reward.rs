use rand::Rng;
use serde::{Deserialize, Serialize};

use super::belief::{nearest_distance, update_belief, Belief};
use super::decision::Objective;
use super::hypothesis::{fit_template, AffineFit, Hypothesis};
use super::{
    measured_locations, valid_points, Measurement, SamplerConfig, SamplerError, SamplingGeometry, LOCATION_EPS,
};

/// Per-candidate verification rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyScores {
    pub candidates: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<AffineFit>,
    /// Fewer than two valid measurements: rewards are all zero.
    pub degenerate: bool,
}

impl VerifyScores {
    fn zeros(candidates: &[f64]) -> Self {
        VerifyScores {
            candidates: candidates.to_vec(),
            values: vec![0.0; candidates.len()],
            fit: None,
            degenerate: true,
        }
    }

    pub fn at(&self, x: f64) -> f64 {
        self.candidates
            .iter()
            .position(|c| (c - x).abs() <= LOCATION_EPS)
            .map(|i| self.values[i])
            .unwrap_or(0.0)
    }
}

/// Pluggable reward functions behind [`suggest_with`].
pub trait RewardModel {
    fn explore(&self, x: f64, measured: &[f64], geometry: &SamplingGeometry, config: &SamplerConfig) -> f64;
    fn verify(
        &self,
        belief: Option<&Belief>,
        hypothesis: &Hypothesis,
        measurements: &[Measurement],
        geometry: &SamplingGeometry,
    ) -> VerifyScores;
}

/// Normalized gap distance for exploration, normalized hypothesis residual
/// for verification.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultRewards;

impl RewardModel for DefaultRewards {
    fn explore(&self, x: f64, measured: &[f64], geometry: &SamplingGeometry, config: &SamplerConfig) -> f64 {
        let gap = (nearest_distance(measured, x) / 0.5).clamp(0.0, 1.0);
        match config.boundary_scale {
            Some(scale) if scale > 0.0 && !geometry.roi_boundaries.is_empty() => {
                let d = geometry
                    .roi_boundaries
                    .iter()
                    .map(|b| (b - x).abs())
                    .fold(f64::INFINITY, f64::min);
                gap * (-d / scale).exp()
            }
            _ => gap,
        }
    }

    fn verify(
        &self,
        belief: Option<&Belief>,
        hypothesis: &Hypothesis,
        measurements: &[Measurement],
        geometry: &SamplingGeometry,
    ) -> VerifyScores {
        let points = valid_points(measurements);
        let (Some(belief), true) = (belief, points.len() >= 2) else {
            return VerifyScores::zeros(&geometry.candidates);
        };
        let fit = fit_template(hypothesis, &points).expect("nonempty");
        let residuals: Vec<f64> = belief
            .candidates
            .iter()
            .zip(&belief.mean)
            .map(|(&x, &m)| (m - fit.predict(hypothesis, x)).abs())
            .collect();
        let max = residuals.iter().copied().fold(0.0, f64::max);
        // Residuals at round-off level of the data count as perfect agreement.
        let scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let values = if max <= 1e-12 * scale.max(1e-300) {
            vec![0.0; residuals.len()]
        } else {
            residuals.iter().map(|r| r / max).collect()
        };
        VerifyScores {
            candidates: belief.candidates.clone(),
            values,
            fit: Some(fit),
            degenerate: false,
        }
    }
}

/// Exploration reward: distance to the nearest valid measurement over half
/// the path, clamped to [0, 1], times the boundary factor when enabled.
pub fn explore_reward(
    x: f64,
    measurements: &[Measurement],
    geometry: &SamplingGeometry,
    config: &SamplerConfig,
) -> f64 {
    DefaultRewards.explore(x, &measured_locations(measurements), geometry, config)
}

/// Verification rewards over all candidates of `belief`.
pub fn verify_rewards(belief: &Belief, hypothesis: &Hypothesis, measurements: &[Measurement]) -> VerifyScores {
    let geometry = SamplingGeometry {
        length_m: 1.0,
        candidates: belief.candidates.clone(),
        roi_boundaries: Vec::new(),
    };
    DefaultRewards.verify(Some(belief), hypothesis, measurements, &geometry)
}

pub fn verify_reward(x: f64, belief: &Belief, hypothesis: &Hypothesis, measurements: &[Measurement]) -> f64 {
    verify_rewards(belief, hypothesis, measurements).at(x)
}

/// Largest gap between adjacent measured locations, boundaries included.
fn largest_gap(measured: &[f64]) -> f64 {
    if measured.is_empty() {
        return 1.0;
    }
    let mut edges = Vec::with_capacity(measured.len() + 2);
    edges.push(0.0);
    edges.extend(measured.iter().map(|x| x.clamp(0.0, 1.0)));
    edges.push(1.0);
    edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Scheduled exploration weight: 1 while any gap is at least
/// `explore_gap`, 0 once every gap is at most `verify_gap`, linear between.
pub fn objective_weight(measurements: &[Measurement], config: &SamplerConfig) -> f64 {
    let g = largest_gap(&measured_locations(measurements));
    ((g - config.verify_gap) / (config.explore_gap - config.verify_gap)).clamp(0.0, 1.0)
}

/// Apply stated objectives, oldest first, to a scheduled weight.
pub fn blend_weight(weight: f64, stated: &[Objective], blend: f64) -> f64 {
    stated.iter().fold(weight, |w, o| match o {
        Objective::Exploration => w + blend * (1.0 - w),
        Objective::Verification => (1.0 - blend) * w,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub location: f64,
    pub explore_reward: f64,
    pub verify_reward: f64,
    pub weight: f64,
    pub combined: f64,
    pub explanation: String,
}

impl Suggestion {
    pub fn dominant(&self) -> Objective {
        if self.weight * self.explore_reward >= (1.0 - self.weight) * self.verify_reward {
            Objective::Exploration
        } else {
            Objective::Verification
        }
    }
}

/// Ranking key: scores equal to nine decimals tie, and ties go to the
/// lower coordinate.
pub fn rank_key(combined: f64) -> i64 {
    (combined * 1e9).round() as i64
}

pub fn suggest(
    measurements: &[Measurement],
    hypothesis: &Hypothesis,
    geometry: &SamplingGeometry,
    k: usize,
    config: &SamplerConfig,
) -> Result<Vec<Suggestion>, SamplerError> {
    let w = objective_weight(measurements, config);
    suggest_with(&DefaultRewards, measurements, hypothesis, geometry, w, k, config)
}

/// Rank unmeasured candidates by `w * explore + (1 - w) * verify`.
pub fn suggest_with<M: RewardModel + ?Sized>(
    model: &M,
    measurements: &[Measurement],
    hypothesis: &Hypothesis,
    geometry: &SamplingGeometry,
    weight: f64,
    k: usize,
    config: &SamplerConfig,
) -> Result<Vec<Suggestion>, SamplerError> {
    geometry.validate()?;
    if k == 0 {
        return Err(SamplerError::Validation("k must be at least 1".into()));
    }
    let weight = weight.clamp(0.0, 1.0);
    let measured = measured_locations(measurements);
    let open: Vec<f64> = geometry
        .candidates
        .iter()
        .copied()
        .filter(|c| !measured.iter().any(|m| (m - c).abs() <= LOCATION_EPS))
        .collect();
    if open.is_empty() {
        return Err(SamplerError::Exhausted);
    }
    let belief = update_belief(measurements, geometry, config).ok();
    let verify = model.verify(belief.as_ref(), hypothesis, measurements, geometry);

    let mut ranked: Vec<Suggestion> = open
        .into_iter()
        .map(|x| {
            let explore_reward = model.explore(x, &measured, geometry, config).clamp(0.0, 1.0);
            let verify_reward = verify.at(x).clamp(0.0, 1.0);
            let combined = (weight * explore_reward + (1.0 - weight) * verify_reward).clamp(0.0, 1.0);
            Suggestion {
                location: x,
                explore_reward,
                verify_reward,
                weight,
                combined,
                explanation: String::new(),
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        rank_key(b.combined)
            .cmp(&rank_key(a.combined))
            .then(a.location.total_cmp(&b.location))
    });
    ranked.truncate(k);
    for s in &mut ranked {
        s.explanation = explain(s, geometry, &verify, belief.as_ref(), hypothesis);
    }
    Ok(ranked)
}

fn explain(
    s: &Suggestion,
    geometry: &SamplingGeometry,
    verify: &VerifyScores,
    belief: Option<&Belief>,
    hypothesis: &Hypothesis,
) -> String {
    let metres = s.location * geometry.length_m;
    let head = format!(
        "Sample at {:.2} ({metres:.1} m); weight w = {:.2}, exploration reward {:.2}, verification reward {:.2}.",
        s.location, s.weight, s.explore_reward, s.verify_reward
    );
    let why = match s.dominant() {
        Objective::Exploration => format!(
            " Exploration dominates: this location fills the widest remaining gap in coverage, {:.1} m from the nearest measurement.",
            s.explore_reward * 0.5 * geometry.length_m
        ),
        Objective::Verification => match (belief, verify.fit) {
            (Some(b), Some(fit)) => format!(
                " Verification dominates: the current strength estimate here ({:.1} N/m) departs from the fitted hypothesis ({:.1} N/m), one of the largest discrepancies on the transect.",
                b.mean_at(s.location),
                fit.predict(hypothesis, s.location)
            ),
            _ => " Verification dominates, but too few measurements exist to test the hypothesis yet.".to_string(),
        },
    };
    head + &why
}

/// Draw one suggestion with probability `∝ exp(combined / temperature)`.
/// A zero temperature returns the top-ranked one.
pub fn softmax_choice<'a, R: Rng + ?Sized>(
    suggestions: &'a [Suggestion],
    temperature: f64,
    rng: &mut R,
) -> Option<&'a Suggestion> {
    if temperature <= 0.0 || suggestions.len() <= 1 {
        return suggestions.first();
    }
    let top = suggestions.iter().map(|s| s.combined).fold(f64::MIN, f64::max);
    let weights: Vec<f64> = suggestions
        .iter()
        .map(|s| ((s.combined - top) / temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random_range(0.0..total);
    for (s, w) in suggestions.iter().zip(&weights) {
        if u < *w {
            return Some(s);
        }
        u -= w;
    }
    suggestions.last()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::tests::measured;
    use crate::sampler::HypothesisShape;

    fn grid() -> SamplingGeometry {
        SamplingGeometry {
            length_m: 10.0,
            candidates: (1..=19).map(|i| i as f64 * 0.05).collect(),
            roi_boundaries: vec![],
        }
    }

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn explore_midpoint_of_only_gap() {
        let m = measured(&[(0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(explore_reward(0.5, &m, &grid(), &cfg()), 1.0);
        let g = grid();
        let best = g
            .candidates
            .iter()
            .copied()
            .filter(|&x| explore_reward(x, &m, &g, &cfg()) == 1.0)
            .collect::<Vec<_>>();
        assert_eq!(best, vec![0.5]);
    }

    #[test]
    fn explore_tie_goes_to_lower_coordinate() {
        let m = measured(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]);
        let top = suggest_with(&DefaultRewards, &m, &Hypothesis::increasing(), &grid(), 1.0, 1, &cfg()).unwrap();
        assert!((top[0].location - 0.25).abs() < 1e-12);
    }

    #[test]
    fn explore_zero_at_measured_location() {
        let m = measured(&[(0.3, 1.0)]);
        assert_eq!(explore_reward(0.3, &m, &grid(), &cfg()), 0.0);
    }

    #[test]
    fn boundary_factor_prefers_boundaries() {
        let m = measured(&[(0.0, 1.0), (1.0, 1.0)]);
        let g = grid().with_boundaries(vec![0.3]);
        let c = SamplerConfig {
            boundary_scale: Some(0.05),
            ..cfg()
        };
        let top = suggest_with(&DefaultRewards, &m, &Hypothesis::increasing(), &g, 1.0, 1, &c).unwrap();
        assert!((top[0].location - 0.3).abs() < 1e-12, "{top:?}");
    }

    #[test]
    fn weight_schedule() {
        assert_eq!(objective_weight(&[], &cfg()), 1.0);
        let dense: Vec<(f64, f64)> = (0..=25).map(|i| (i as f64 * 0.04, 1.0)).collect();
        assert_eq!(objective_weight(&measured(&dense), &cfg()), 0.0);
        // Largest gap 0.15 (0.85 .. 1.0).
        let m = measured(&[
            (0.0, 1.0),
            (0.1, 1.0),
            (0.2, 1.0),
            (0.3, 1.0),
            (0.4, 1.0),
            (0.5, 1.0),
            (0.6, 1.0),
            (0.7, 1.0),
            (0.85, 1.0),
        ]);
        assert!((objective_weight(&m, &cfg()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn verify_zero_on_agreement() {
        let m = measured(&[(0.0, 10.0), (0.5, 20.0), (1.0, 30.0)]);
        let b = update_belief(&m, &grid(), &cfg()).unwrap();
        let v = verify_rewards(&b, &Hypothesis::increasing(), &m);
        assert!(!v.degenerate);
        assert!(v.values.iter().all(|&r| r == 0.0), "{v:?}");
    }

    #[test]
    fn verify_peaks_where_belief_is_flat() {
        // Rising ends with a flat middle: residual is largest inside the plateau.
        let m = measured(&[(0.0, 0.0), (0.3, 30.0), (0.7, 30.0), (1.0, 100.0)]);
        let g = grid();
        let b = update_belief(&m, &g, &cfg()).unwrap();
        let h = Hypothesis::increasing();
        let v = verify_rewards(&b, &h, &m);
        // Brute-force residual scan.
        let fit = fit_template(&h, &valid_points(&m)).unwrap();
        let (best, _) = g.candidates.iter().zip(&b.mean).fold((0.0, -1.0), |acc, (&x, &mu)| {
            let r = (mu - fit.predict(&h, x)).abs();
            if r > acc.1 {
                (x, r)
            } else {
                acc
            }
        });
        let argmax = v.candidates[v
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |a, (i, &r)| if r > a.1 { (i, r) } else { a })
            .0];
        assert_eq!(argmax, best);
        assert!((0.3 - 1e-9..=0.7 + 1e-9).contains(&argmax), "{argmax}");
    }

    #[test]
    fn verify_needs_two_points() {
        let m = measured(&[(0.5, 10.0)]);
        let b = update_belief(&m, &grid(), &cfg()).unwrap();
        let v = verify_rewards(&b, &Hypothesis::increasing(), &m);
        assert!(v.degenerate);
        assert!(v.values.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn feedback_blend_arithmetic() {
        assert!((blend_weight(0.8, &[Objective::Verification], 0.5) - 0.4).abs() < 1e-12);
        assert!((blend_weight(0.4, &[Objective::Exploration], 0.5) - 0.7).abs() < 1e-12);
        assert_eq!(blend_weight(0.3, &[], 0.5), 0.3);
    }

    #[test]
    fn weight_endpoints_reduce_to_single_objective() {
        let m = measured(&[(0.0, 0.0), (0.3, 30.0), (0.7, 30.0), (1.0, 100.0)]);
        let h = Hypothesis::new(HypothesisShape::MonotoneIncreasing, "");
        let g = grid();
        let explore_only = suggest_with(&DefaultRewards, &m, &h, &g, 1.0, 5, &cfg()).unwrap();
        for s in &explore_only {
            assert_eq!(s.combined, s.explore_reward);
            assert!(s.explanation.contains("Exploration dominates"));
        }
        let verify_only = suggest_with(&DefaultRewards, &m, &h, &g, 0.0, 5, &cfg()).unwrap();
        for w in verify_only.windows(2) {
            assert!(w[0].verify_reward >= w[1].verify_reward);
        }
        assert!(verify_only[0].explanation.contains("Verification dominates"));
    }

    #[test]
    fn exhausted_when_everything_measured() {
        let g = SamplingGeometry::uniform(1.0, 3);
        let m = measured(&[(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]);
        assert_eq!(
            suggest(&m, &Hypothesis::increasing(), &g, 1, &cfg()),
            Err(SamplerError::Exhausted)
        );
    }

    #[test]
    fn softmax_zero_temperature_is_argmax() {
        use rand::SeedableRng;
        let m = measured(&[(0.0, 1.0), (1.0, 1.0)]);
        let s = suggest(&m, &Hypothesis::increasing(), &grid(), 3, &cfg()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(softmax_choice(&s, 0.0, &mut rng), s.first());
        assert!(softmax_choice(&s, 0.5, &mut rng).is_some());
    }
}
