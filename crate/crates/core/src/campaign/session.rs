use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::site::SiteConfig;
use super::CampaignError;
use crate::leg::{simulate_measurement, GaitKind, GaitProtocol, LegError, LegReading, MeasurementSetup};
use crate::sampler::{
    hypothesis_confidence, suggest_with, update_belief, AutonomyState, Belief, Confidence, DecisionRecord,
    DefaultRewards, Feedback, Hypothesis, Measurement, Outcome, SamplerConfig, SamplingGeometry, SuggestionRound,
    LOCATION_EPS,
};
use crate::terrain::{PathSpec, TerrainField};

/// Everything fixed at session creation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub id: String,
    /// Site file text, verbatim.
    pub site: String,
    pub hypothesis: Hypothesis,
    pub seed: u64,
    /// Gait used when a request does not name one.
    pub gait: GaitKind,
    #[serde(default)]
    pub ground_tilt: f64,
    pub setup: MeasurementSetup,
    pub sampler: SamplerConfig,
    pub geometry: SamplingGeometry,
}

impl SessionSpec {
    /// Spec with the site's defaults and a fresh id.
    pub fn new(site: &SiteConfig, seed: u64) -> Result<Self, CampaignError> {
        let field = site.terrain.build()?;
        site.flags()?;
        Ok(SessionSpec {
            id: uuid::Uuid::new_v4().simple().to_string(),
            site: site.source.clone(),
            hypothesis: site.hypothesis(),
            seed,
            gait: GaitKind::CrawlNSense,
            ground_tilt: 0.0,
            setup: site.measurement(),
            sampler: site.sampler_config(),
            geometry: site.geometry(&field)?,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_hypothesis(mut self, hypothesis: Hypothesis) -> Self {
        self.hypothesis = hypothesis;
        self
    }

    pub fn with_gait(mut self, gait: GaitKind) -> Self {
        self.gait = gait;
        self
    }

    fn validate(&self) -> Result<(), CampaignError> {
        let id_ok = !self.id.is_empty()
            && self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !id_ok {
            return Err(CampaignError::Validation(format!(
                "session id {:?} must be nonempty ASCII letters, digits, '-' or '_'",
                self.id
            )));
        }
        self.hypothesis.validate()?;
        self.geometry.validate()?;
        if !self.ground_tilt.is_finite() || self.ground_tilt.abs() >= std::f64::consts::FRAC_PI_4 {
            return Err(CampaignError::Validation(format!(
                "ground tilt {} rad is out of range",
                self.ground_tilt
            )));
        }
        GaitProtocol::for_kind(self.gait).validate()?;
        self.setup.intruder.validate()?;
        self.setup.protocol.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementOrigin {
    /// Part of the scientist's initial plan.
    Plan,
    /// Head of the decision queue.
    Queue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    SessionCreated(Box<SessionSpec>),
    MeasurementAdded {
        measurement: Measurement,
        origin: MeasurementOrigin,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        abort: Option<LegError>,
    },
    SuggestionsIssued(SuggestionRound),
    DecisionRecorded(DecisionRecord),
    SessionConcluded {
        #[serde(default)]
        note: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Open,
    Concluded,
}

/// The fold of a session's events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub spec: SessionSpec,
    pub measurements: Vec<Measurement>,
    pub autonomy: AutonomyState,
    pub status: SessionStatus,
    pub event_count: u64,
    pub created_ms: u64,
    pub updated_ms: u64,
}

/// Canonical serialization used for replay comparisons.
pub fn canonical_json(state: &SessionState) -> String {
    serde_json::to_string(state).expect("session state serializes")
}

/// Seed for measurement `id` of a session seeded with `session_seed`.
pub fn derive_seed(session_seed: u64, id: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed);
    rng.set_stream(id.wrapping_add(1));
    rng.next_u64()
}

/// Source of event timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    #[default]
    System,
    /// Every event gets this timestamp.
    Fixed(u64),
}

impl Clock {
    pub fn now_ms(&self) -> u64 {
        match self {
            Clock::System => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            Clock::Fixed(t) => *t,
        }
    }
}

/// A live campaign session.
#[derive(Debug, Clone)]
pub struct Session {
    state: SessionState,
    events: Vec<Event>,
    field: Arc<TerrainField>,
    path: PathSpec,
    /// The site's default plan, normalized.
    flags: Vec<f64>,
    clock: Clock,
}

impl Session {
    pub fn create(spec: SessionSpec, clock: Clock) -> Result<Session, CampaignError> {
        spec.validate()?;
        let event = Event {
            seq: 0,
            timestamp_ms: clock.now_ms(),
            kind: EventKind::SessionCreated(Box::new(spec)),
        };
        let mut session = Session::from_created(&event, 0)?;
        session.events.push(event);
        session.clock = clock;
        Ok(session)
    }

    fn from_created(event: &Event, index: usize) -> Result<Session, CampaignError> {
        let EventKind::SessionCreated(spec) = &event.kind else {
            return Err(CampaignError::corrupt(index, "log does not start with session_created"));
        };
        let site = SiteConfig::from_toml(&spec.site)
            .map_err(|e| CampaignError::corrupt(index, format!("embedded site file: {e}")))?;
        let field = site
            .terrain
            .build()
            .map_err(|e| CampaignError::corrupt(index, format!("embedded site file: {e}")))?;
        let path = site
            .terrain
            .sampling_path()
            .map_err(|e| CampaignError::corrupt(index, format!("embedded site file: {e}")))?;
        let flags = site
            .flags()
            .map_err(|e| CampaignError::corrupt(index, format!("embedded site file: {e}")))?;
        Ok(Session {
            state: SessionState {
                spec: (**spec).clone(),
                measurements: Vec::new(),
                autonomy: AutonomyState::default(),
                status: SessionStatus::Open,
                event_count: 1,
                created_ms: event.timestamp_ms,
                updated_ms: event.timestamp_ms,
            },
            events: Vec::new(),
            field: Arc::new(field),
            path,
            flags,
            clock: Clock::default(),
        })
    }

    pub fn flags(&self) -> &[f64] {
        &self.flags
    }

    pub fn id(&self) -> &str {
        &self.state.spec.id
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn field(&self) -> &TerrainField {
        &self.field
    }

    pub fn path(&self) -> &PathSpec {
        &self.path
    }

    pub fn set_clock(&mut self, clock: Clock) {
        self.clock = clock;
    }

    pub fn is_open(&self) -> bool {
        self.state.status == SessionStatus::Open
    }

    pub fn canonical_json(&self) -> String {
        canonical_json(&self.state)
    }

    fn ensure_open(&self) -> Result<(), CampaignError> {
        if self.is_open() {
            Ok(())
        } else {
            Err(CampaignError::Conflict(format!("session {} is concluded", self.id())))
        }
    }

    /// Apply one event to the fold.
    fn apply(&mut self, event: &Event, index: usize) -> Result<(), CampaignError> {
        let corrupt = |reason: String| CampaignError::corrupt(index, reason);
        if !self.is_open() {
            return Err(corrupt("event after session_concluded".into()));
        }
        let state = &mut self.state;
        match &event.kind {
            EventKind::SessionCreated(_) => return Err(corrupt("second session_created".into())),
            EventKind::MeasurementAdded {
                measurement, origin, ..
            } => {
                if measurement.id != state.measurements.len() as u64 {
                    return Err(corrupt(format!(
                        "measurement id {} out of order (expected {})",
                        measurement.id,
                        state.measurements.len()
                    )));
                }
                if !state.spec.geometry.contains(measurement.location) {
                    return Err(corrupt(format!("location {} out of bounds", measurement.location)));
                }
                if *origin == MeasurementOrigin::Queue {
                    match state.autonomy.queue.front() {
                        Some(x) if (x - measurement.location).abs() <= LOCATION_EPS => {
                            state.autonomy.queue.pop_front();
                        }
                        other => {
                            return Err(corrupt(format!(
                                "queued measurement at {} but queue head is {other:?}",
                                measurement.location
                            )))
                        }
                    }
                }
                state.measurements.push(measurement.clone());
            }
            EventKind::SuggestionsIssued(round) => state
                .autonomy
                .restore_round(round.clone())
                .map_err(|e| corrupt(e.to_string()))?,
            EventKind::DecisionRecorded(decision) => state
                .autonomy
                .record_decision(decision.clone(), &state.spec.geometry)
                .map_err(|e| corrupt(e.to_string()))?,
            EventKind::SessionConcluded { .. } => state.status = SessionStatus::Concluded,
        }
        state.event_count += 1;
        state.updated_ms = event.timestamp_ms;
        Ok(())
    }

    fn emit(&mut self, kind: EventKind) -> Result<&Event, CampaignError> {
        let index = self.events.len();
        let event = Event {
            seq: index as u64,
            timestamp_ms: self.clock.now_ms(),
            kind,
        };
        self.apply(&event, index)?;
        self.events.push(event);
        Ok(&self.events[index])
    }

    fn simulate(&self, id: u64, seed: u64, location: f64, gait: GaitKind) -> Result<LegReading, CampaignError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        simulate_measurement(
            &self.field,
            &self.path,
            location,
            &GaitProtocol::for_kind(gait),
            self.state.spec.ground_tilt,
            &self.state.spec.setup,
            &mut rng,
        )
        .map_err(|e| match e {
            LegError::OutOfBounds(m) => CampaignError::Validation(format!("measurement {id}: {m}")),
            other => CampaignError::Leg(other),
        })
    }

    fn measure(&mut self, location: f64, gait: GaitKind, origin: MeasurementOrigin) -> Result<u64, CampaignError> {
        let id = self.state.measurements.len() as u64;
        let seed = derive_seed(self.state.spec.seed, id);
        let reading = self.simulate(id, seed, location, gait)?;
        if let Some(abort) = &reading.abort {
            tracing::warn!(session = %self.id(), id, location, "measurement aborted: {abort}");
        }
        let measurement = Measurement {
            id,
            location,
            strength: reading.strength,
            gait,
            timestamp_ms: self.clock.now_ms(),
            valid: reading.valid,
            summary: reading.summary,
            cost_s: reading.cost_s,
            seed,
        };
        self.emit(EventKind::MeasurementAdded {
            measurement,
            origin,
            abort: reading.abort,
        })?;
        Ok(id)
    }

    /// Measure every planned location in order. The whole plan is rejected
    /// if any location is out of bounds. Aborted measurements are logged as
    /// invalid and ignored downstream.
    pub fn run_initial_plan(&mut self, locations: &[f64], gait: Option<GaitKind>) -> Result<Vec<u64>, CampaignError> {
        self.ensure_open()?;
        if let Some(bad) = locations
            .iter()
            .find(|x| !x.is_finite() || !self.state.spec.geometry.contains(**x))
        {
            return Err(CampaignError::Validation(format!(
                "planned location {bad} is outside [0, 1]"
            )));
        }
        let gait = gait.unwrap_or(self.state.spec.gait);
        locations
            .iter()
            .map(|&x| self.measure(x, gait, MeasurementOrigin::Plan))
            .collect()
    }

    /// Measure everything waiting in the decision queue.
    pub fn measure_pending(&mut self, gait: Option<GaitKind>) -> Result<Vec<u64>, CampaignError> {
        self.ensure_open()?;
        let gait = gait.unwrap_or(self.state.spec.gait);
        let mut ids = Vec::new();
        while let Some(&x) = self.state.autonomy.queue.front() {
            ids.push(self.measure(x, gait, MeasurementOrigin::Queue)?);
        }
        Ok(ids)
    }

    pub fn effective_weight(&self) -> f64 {
        self.state
            .autonomy
            .effective_weight(&self.state.measurements, &self.state.spec.sampler)
    }

    fn open_candidates(&self) -> usize {
        let measured: Vec<f64> = self
            .state
            .measurements
            .iter()
            .filter(|m| m.valid)
            .map(|m| m.location)
            .collect();
        self.state
            .spec
            .geometry
            .candidates
            .iter()
            .filter(|c| !measured.iter().any(|m| (m - *c).abs() <= LOCATION_EPS))
            .count()
    }

    /// The current suggestion round. An undecided round issued after the
    /// last state change is returned as is; otherwise a new round is issued.
    pub fn suggestions(&mut self, k: usize) -> Result<SuggestionRound, CampaignError> {
        self.ensure_open()?;
        if let (Some(round), Some(last)) = (self.state.autonomy.open_round(), self.events.last()) {
            let fresh = matches!(&last.kind, EventKind::SuggestionsIssued(r) if r.round == round.round);
            if fresh && round.suggestions.len() == k.min(self.open_candidates()) {
                return Ok(round.clone());
            }
        }
        let weight = self.effective_weight();
        let spec = &self.state.spec;
        let suggestions = suggest_with(
            &DefaultRewards,
            &self.state.measurements,
            &spec.hypothesis,
            &spec.geometry,
            weight,
            k,
            &spec.sampler,
        )?;
        let round = SuggestionRound {
            round: self.state.autonomy.next_round_number(),
            weight,
            suggestions,
            decided: false,
        };
        self.emit(EventKind::SuggestionsIssued(round.clone()))?;
        Ok(round)
    }

    /// Record a decision on the latest round. The suggestion is matched by
    /// location and replaced with the one actually issued.
    pub fn decide(&mut self, mut decision: DecisionRecord) -> Result<(), CampaignError> {
        self.ensure_open()?;
        let autonomy = &self.state.autonomy;
        autonomy.check_decision(&decision, &self.state.spec.geometry)?;
        if let Some(issued) = autonomy.latest_round().and_then(|r| {
            r.suggestions
                .iter()
                .find(|s| (s.location - decision.suggestion.location).abs() <= LOCATION_EPS)
        }) {
            decision.suggestion = issued.clone();
        }
        self.emit(EventKind::DecisionRecorded(decision))?;
        Ok(())
    }

    /// Decide on the `rank`-th (0-based) suggestion of round `round`.
    pub fn decide_rank(
        &mut self,
        round: u64,
        rank: usize,
        outcome: Outcome,
        feedback: Feedback,
    ) -> Result<(), CampaignError> {
        let suggestion = self
            .state
            .autonomy
            .rounds
            .iter()
            .find(|r| r.round == round)
            .and_then(|r| r.suggestions.get(rank))
            .cloned()
            .ok_or_else(|| CampaignError::Validation(format!("round {round} has no suggestion {rank}")))?;
        self.decide(DecisionRecord {
            round,
            suggestion,
            outcome,
            feedback,
        })
    }

    pub fn conclude(&mut self, note: impl Into<String>) -> Result<(), CampaignError> {
        self.ensure_open()?;
        self.emit(EventKind::SessionConcluded { note: note.into() })?;
        Ok(())
    }

    pub fn belief(&self) -> Result<Belief, CampaignError> {
        Ok(update_belief(
            &self.state.measurements,
            &self.state.spec.geometry,
            &self.state.spec.sampler,
        )?)
    }

    pub fn confidence(&self) -> Option<Confidence> {
        hypothesis_confidence(&self.state.spec.hypothesis, &self.state.measurements).ok()
    }

    pub fn measurement(&self, id: u64) -> Result<&Measurement, CampaignError> {
        self.state
            .measurements
            .get(id as usize)
            .ok_or_else(|| CampaignError::NotFound(format!("measurement {id} in session {}", self.id())))
    }

    /// Re-derive the curves behind measurement `id` from its logged seed.
    pub fn reading(&self, id: u64) -> Result<LegReading, CampaignError> {
        let m = self.measurement(id)?;
        let reading = self.simulate(id, m.seed, m.location, m.gait)?;
        if reading.strength.to_bits() != m.strength.to_bits() {
            return Err(CampaignError::Conflict(format!(
                "measurement {id} does not reproduce from its seed"
            )));
        }
        Ok(reading)
    }
}

/// Rebuild a session from its event log.
pub fn replay(events: &[Event]) -> Result<Session, CampaignError> {
    let first = events
        .first()
        .ok_or_else(|| CampaignError::corrupt(0, "empty log: missing session_created"))?;
    check_seq(first, 0)?;
    let mut session = Session::from_created(first, 0)?;
    session.events.push(first.clone());
    for (index, event) in events.iter().enumerate().skip(1) {
        check_seq(event, index)?;
        session.apply(event, index)?;
        session.events.push(event.clone());
    }
    Ok(session)
}

fn check_seq(event: &Event, index: usize) -> Result<(), CampaignError> {
    let expected = index as u64;
    match event.seq.cmp(&expected) {
        std::cmp::Ordering::Equal => Ok(()),
        std::cmp::Ordering::Less => Err(CampaignError::corrupt(
            index,
            format!("duplicate sequence number {} (expected {expected})", event.seq),
        )),
        std::cmp::Ordering::Greater => Err(CampaignError::corrupt(
            index,
            format!("sequence gap: expected {expected}, found {}", event.seq),
        )),
    }
}

impl Session {
    /// Parse and replay a JSON-lines event log.
    pub fn from_jsonl(text: &str) -> Result<Session, CampaignError> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                serde_json::from_str::<Event>(line)
                    .map_err(|e| CampaignError::corrupt(i, format!("unparseable event: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        replay(&events)
    }

    /// Events from `from` on, one JSON object per line.
    pub fn events_jsonl(&self, from: usize) -> String {
        self.events[from.min(self.events.len())..]
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }
}
