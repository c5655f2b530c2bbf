//! Adaptive sampling along a transect with a human in the loop.
//!
//! Two objectives compete for the next measurement. Exploration rewards
//! distance from existing measurements, so its argmax reproduces
//! equal-interval sampling. Verification rewards disagreement between the
//! current belief and the (affinely fitted) hypothesis template. A weight
//! `w` moves from exploration to verification as gaps close, and the
//! scientist's feedback can push it either way.
//!
//! All locations are normalized path coordinates in `[0, 1]`.

mod belief;
mod decision;
mod hypothesis;
mod reward;

pub use belief::{update_belief, Belief};
pub use decision::{AutonomyState, DecisionRecord, Feedback, Objective, Outcome, SuggestionRound};
pub use hypothesis::{fit_template, hypothesis_confidence, AffineFit, Confidence, Hypothesis, HypothesisShape};
pub use reward::{
    blend_weight, explore_reward, objective_weight, rank_key, softmax_choice, suggest, suggest_with, verify_reward,
    verify_rewards, DefaultRewards, RewardModel, Suggestion, VerifyScores,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intrusion::StrengthSummary;
use crate::leg::GaitKind;

/// Two locations closer than this are the same place.
pub const LOCATION_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid sampler state: {0}")]
    State(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("every candidate location has been measured")]
    Exhausted,
    #[error("stale suggestion round {given} (latest is {latest:?})")]
    StaleRound { given: u64, latest: Option<u64> },
}

/// A strength reading pinned to a path location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub id: u64,
    pub location: f64,
    /// One-way spring stiffness, N/m.
    pub strength: f64,
    pub gait: GaitKind,
    pub timestamp_ms: u64,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<StrengthSummary>,
    #[serde(default)]
    pub cost_s: f64,
    /// Seed that reproduces the underlying curves.
    #[serde(default)]
    pub seed: u64,
}

/// Valid `(location, strength)` pairs sorted by location; repeated
/// locations are averaged.
pub(crate) fn valid_points(measurements: &[Measurement]) -> Vec<(f64, f64)> {
    let mut raw: Vec<(f64, f64)> = measurements
        .iter()
        .filter(|m| m.valid && m.strength.is_finite() && m.strength >= 0.0)
        .map(|m| (m.location, m.strength))
        .collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, usize)> = Vec::with_capacity(raw.len());
    for (x, y) in raw {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= LOCATION_EPS => {
                last.1 += y;
                last.2 += 1;
            }
            _ => out.push((x, y, 1)),
        }
    }
    out.into_iter().map(|(x, s, n)| (x, s / n as f64)).collect()
}

pub(crate) fn measured_locations(measurements: &[Measurement]) -> Vec<f64> {
    valid_points(measurements).into_iter().map(|p| p.0).collect()
}

/// Where a campaign may sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingGeometry {
    /// Physical path length, m; only used in explanations.
    pub length_m: f64,
    /// Candidate locations, sorted, in [0, 1].
    pub candidates: Vec<f64>,
    /// Region-of-interest boundaries along the path, normalized. When
    /// nonempty and `SamplerConfig::boundary_scale` is set, exploration
    /// favors candidates near a boundary.
    #[serde(default)]
    pub roi_boundaries: Vec<f64>,
}

impl SamplingGeometry {
    /// `n` evenly spaced candidates including both ends.
    pub fn uniform(length_m: f64, n: usize) -> Self {
        let n = n.max(2);
        SamplingGeometry {
            length_m,
            candidates: (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
            roi_boundaries: Vec::new(),
        }
    }

    pub fn with_boundaries(mut self, boundaries: Vec<f64>) -> Self {
        self.roi_boundaries = boundaries;
        self
    }

    pub fn contains(&self, x: f64) -> bool {
        (0.0..=1.0).contains(&x)
    }

    pub fn is_candidate(&self, x: f64) -> bool {
        self.candidates.iter().any(|c| (c - x).abs() <= LOCATION_EPS)
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.candidates.is_empty() {
            return Err(SamplerError::Validation("no candidate locations".into()));
        }
        if self.candidates.iter().any(|c| !self.contains(*c)) {
            return Err(SamplerError::Validation("candidates must lie in [0, 1]".into()));
        }
        if self.candidates.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SamplerError::Validation(
                "candidates must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Tunable constants. The gap thresholds and blend factor encode only the
/// direction of the exploration-to-verification shift; their values are
/// fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Belief uncertainty at a measured location, N/m.
    pub sigma_floor: f64,
    /// Uncertainty growth per unit normalized distance, N/m.
    pub sigma_scale: f64,
    /// Largest gap at or above which the weight is pure exploration.
    pub explore_gap: f64,
    /// Largest gap at or below which the weight is pure verification.
    pub verify_gap: f64,
    /// How far one piece of objective feedback moves the weight.
    pub feedback_blend: f64,
    /// Decay length of the boundary-proximity factor, normalized. `None`
    /// disables it.
    pub boundary_scale: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sigma_floor: 5.0,
            sigma_scale: 200.0,
            explore_gap: 0.25,
            verify_gap: 0.05,
            feedback_blend: 0.5,
            boundary_scale: None,
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn measured(points: &[(f64, f64)]) -> Vec<Measurement> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(location, strength))| Measurement {
                id: i as u64,
                location,
                strength,
                gait: GaitKind::CrawlNSense,
                timestamp_ms: 0,
                valid: true,
                summary: None,
                cost_s: 0.0,
                seed: 0,
            })
            .collect()
    }

    #[test]
    fn invalid_measurements_are_ignored() {
        let mut m = measured(&[(0.2, 10.0), (0.4, 20.0)]);
        m[1].valid = false;
        assert_eq!(valid_points(&m), vec![(0.2, 10.0)]);
    }

    #[test]
    fn repeated_locations_average() {
        let m = measured(&[(0.5, 10.0), (0.5, 20.0), (0.1, 1.0)]);
        assert_eq!(valid_points(&m), vec![(0.1, 1.0), (0.5, 15.0)]);
    }

    #[test]
    fn uniform_geometry() {
        let g = SamplingGeometry::uniform(55.0, 101);
        assert_eq!(g.candidates.len(), 101);
        assert_eq!(g.candidates[0], 0.0);
        assert_eq!(g.candidates[100], 1.0);
        assert!(g.validate().is_ok());
        assert!(g.is_candidate(0.37));
    }
}
