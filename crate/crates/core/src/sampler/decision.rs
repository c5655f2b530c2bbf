use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::reward::{blend_weight, objective_weight, Suggestion};
use super::{Measurement, SamplerConfig, SamplerError, SamplingGeometry, LOCATION_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Exploration,
    Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    RejectedWithAlternative { location: f64 },
    RejectedNoAlternative,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feedback {
    #[default]
    None,
    ObjectiveMismatch {
        stated: Objective,
    },
    LocationMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    /// Round the decision answers; must be the latest one.
    pub round: u64,
    pub suggestion: Suggestion,
    pub outcome: Outcome,
    #[serde(default)]
    pub feedback: Feedback,
}

impl DecisionRecord {
    /// Location this decision sends the robot to, if any.
    pub fn enqueued(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Accepted => Some(self.suggestion.location),
            Outcome::RejectedWithAlternative { location } => Some(location),
            Outcome::RejectedNoAlternative => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionRound {
    pub round: u64,
    pub weight: f64,
    pub suggestions: Vec<Suggestion>,
    #[serde(default)]
    pub decided: bool,
}

/// The accept/reject/feedback state machine.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AutonomyState {
    pub rounds: Vec<SuggestionRound>,
    /// Locations waiting to be measured, head first.
    pub queue: VecDeque<f64>,
    /// Stated objectives in the order they were given.
    pub objective_feedback: Vec<Objective>,
    pub location_mismatches: u64,
    pub decisions: Vec<DecisionRecord>,
}

impl AutonomyState {
    /// Scheduled weight with every stated objective folded in.
    pub fn effective_weight(&self, measurements: &[Measurement], config: &SamplerConfig) -> f64 {
        blend_weight(
            objective_weight(measurements, config),
            &self.objective_feedback,
            config.feedback_blend,
        )
    }

    pub fn latest_round(&self) -> Option<&SuggestionRound> {
        self.rounds.last()
    }

    /// Undecided latest round, if any.
    pub fn open_round(&self) -> Option<&SuggestionRound> {
        self.rounds.last().filter(|r| !r.decided)
    }

    pub fn next_round_number(&self) -> u64 {
        self.rounds.last().map_or(0, |r| r.round + 1)
    }

    /// Record a new round; any earlier undecided round becomes stale.
    pub fn issue_round(&mut self, weight: f64, suggestions: Vec<Suggestion>) -> u64 {
        let round = self.next_round_number();
        self.rounds.push(SuggestionRound {
            round,
            weight,
            suggestions,
            decided: false,
        });
        round
    }

    /// Re-insert a round as logged. Round numbers must strictly increase.
    pub fn restore_round(&mut self, round: SuggestionRound) -> Result<(), SamplerError> {
        if let Some(last) = self.rounds.last() {
            if round.round <= last.round {
                return Err(SamplerError::State(format!(
                    "round {} does not follow round {}",
                    round.round, last.round
                )));
            }
        }
        self.rounds.push(round);
        Ok(())
    }

    /// Check a decision without applying it.
    pub fn check_decision(&self, decision: &DecisionRecord, geometry: &SamplingGeometry) -> Result<(), SamplerError> {
        let latest = self.rounds.last();
        match latest {
            Some(r) if r.round == decision.round && !r.decided => {
                if !r
                    .suggestions
                    .iter()
                    .any(|s| (s.location - decision.suggestion.location).abs() <= LOCATION_EPS)
                {
                    return Err(SamplerError::Validation(format!(
                        "location {} was not suggested in round {}",
                        decision.suggestion.location, r.round
                    )));
                }
            }
            _ => {
                return Err(SamplerError::StaleRound {
                    given: decision.round,
                    latest: latest.map(|r| r.round),
                })
            }
        }
        if let Outcome::RejectedWithAlternative { location } = decision.outcome {
            if !geometry.is_candidate(location) {
                return Err(SamplerError::Validation(format!(
                    "alternative {location} is not a candidate location"
                )));
            }
        }
        Ok(())
    }

    pub fn record_decision(
        &mut self,
        decision: DecisionRecord,
        geometry: &SamplingGeometry,
    ) -> Result<(), SamplerError> {
        self.check_decision(&decision, geometry)?;
        if let Some(x) = decision.enqueued() {
            self.queue.push_back(x);
        }
        match decision.feedback {
            Feedback::None => {}
            Feedback::ObjectiveMismatch { stated } => self.objective_feedback.push(stated),
            Feedback::LocationMismatch => self.location_mismatches += 1,
        }
        if let Some(r) = self.rounds.last_mut() {
            r.decided = true;
        }
        self.decisions.push(decision);
        Ok(())
    }
}
