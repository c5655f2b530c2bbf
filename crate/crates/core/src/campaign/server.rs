use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::session::{Clock, Session, SessionSpec, SessionState};
use super::site::SiteConfig;
use super::store::Store;
use super::CampaignError;
use crate::intrusion::ForceDepthCurve;
use crate::leg::{GaitKind, LegError};
use crate::sampler::{
    fit_template, AffineFit, Belief, Confidence, DecisionRecord, Feedback, Hypothesis, Measurement, Outcome,
    SamplerError, Suggestion, SuggestionRound, LOCATION_EPS,
};

struct Slot {
    /// Serializes writers; readers never take it.
    writer: tokio::sync::Mutex<()>,
    snapshot: RwLock<Arc<Session>>,
}

/// Shared service state: the store plus a committed snapshot per session.
pub struct AppState {
    store: Store,
    clock: Clock,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        Self::with_clock(store, Clock::System)
    }

    pub fn with_clock(store: Store, clock: Clock) -> Self {
        AppState {
            store,
            clock,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, CampaignError> {
        if let Some(slot) = self.sessions.read().get(id) {
            return Ok(slot.clone());
        }
        let mut session = self.store.load(id)?;
        session.set_clock(self.clock);
        let mut map = self.sessions.write();
        let slot = map.entry(id.to_string()).or_insert_with(|| {
            Arc::new(Slot {
                writer: tokio::sync::Mutex::new(()),
                snapshot: RwLock::new(Arc::new(session)),
            })
        });
        Ok(slot.clone())
    }

    /// Latest committed state of a session.
    pub fn snapshot(&self, id: &str) -> Result<Arc<Session>, CampaignError> {
        Ok(self.slot(id)?.snapshot.read().clone())
    }

    /// Run `op` on a copy of the session, persist the new events, then
    /// publish the copy. A failed `op` leaves no trace.
    async fn write<T>(
        &self,
        id: &str,
        op: impl FnOnce(&mut Session) -> Result<T, CampaignError>,
    ) -> Result<(T, Arc<Session>), CampaignError> {
        let slot = self.slot(id)?;
        let _writer = slot.writer.lock().await;
        let mut session = (**slot.snapshot.read()).clone();
        let out = op(&mut session)?;
        self.store.save(&session)?;
        let session = Arc::new(session);
        *slot.snapshot.write() = session.clone();
        Ok((out, session))
    }

    fn insert(&self, session: Session) -> Result<Arc<Session>, CampaignError> {
        let id = session.id().to_string();
        let mut map = self.sessions.write();
        if map.contains_key(&id) || self.store.exists(&id) {
            return Err(CampaignError::Conflict(format!("session {id} already exists")));
        }
        self.store.create(&session)?;
        let session = Arc::new(session);
        map.insert(
            id,
            Arc::new(Slot {
                writer: tokio::sync::Mutex::new(()),
                snapshot: RwLock::new(session.clone()),
            }),
        );
        Ok(session)
    }
}

pub struct ApiError(CampaignError);

impl From<CampaignError> for ApiError {
    fn from(e: CampaignError) -> Self {
        ApiError(e)
    }
}

impl ApiError {
    fn status(&self) -> StatusCode {
        use CampaignError as C;
        match &self.0 {
            C::NotFound(_) => StatusCode::NOT_FOUND,
            C::Conflict(_) | C::Sampler(SamplerError::StaleRound { .. }) => StatusCode::CONFLICT,
            C::Validation(_)
            | C::Sampler(_)
            | C::Terrain(_)
            | C::Intrusion(_)
            | C::Leg(LegError::InvalidInput(_) | LegError::OutOfBounds(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            C::Leg(_) | C::Corrupt { .. } | C::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!("{}", self.0);
        }
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub state: SessionState,
    pub effective_weight: f64,
    pub confidence: Option<Confidence>,
    /// The site's default plan, normalized.
    pub flags: Vec<f64>,
}

impl SessionView {
    fn of(session: &Session) -> Self {
        SessionView {
            state: session.state().clone(),
            effective_weight: session.effective_weight(),
            confidence: session.confidence(),
            flags: session.flags().to_vec(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    /// Preset name; ignored when `site_toml` is given.
    #[serde(default)]
    pub site: Option<String>,
    #[serde(default)]
    pub site_toml: Option<String>,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub hypothesis: Option<Hypothesis>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub gait: Option<GaitKind>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    #[serde(default)]
    pub locations: Vec<f64>,
    /// Measure the site's flags, ahead of any explicit locations.
    #[serde(default)]
    pub flags: bool,
    #[serde(default)]
    pub gait: Option<GaitKind>,
}

#[derive(Debug, Deserialize)]
pub struct SuggestQuery {
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    3
}

/// Which suggestion a decision answers.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SuggestionRef {
    Full(Suggestion),
    Location { location: f64 },
    Rank { rank: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRequest {
    pub round: u64,
    pub suggestion: SuggestionRef,
    pub outcome: Outcome,
    #[serde(default)]
    pub feedback: Feedback,
    /// Measure the enqueued location right away.
    #[serde(default = "yes")]
    pub measure: bool,
    #[serde(default)]
    pub gait: Option<GaitKind>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
pub struct ConcludeRequest {
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveView {
    pub measurement: Measurement,
    pub truth: ForceDepthCurve,
    pub estimate: ForceDepthCurve,
    pub abort: Option<LegError>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BeliefView {
    pub belief: Belief,
    /// Fitted hypothesis at each candidate; absent below two measurements.
    pub hypothesis: Option<Vec<f64>>,
    pub fit: Option<AffineFit>,
    pub confidence: Option<Confidence>,
}

async fn list_sessions(State(app): State<Arc<AppState>>) -> ApiResult<Vec<String>> {
    Ok(Json(app.store.ids()?))
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let site = match (&req.site_toml, &req.site) {
        (Some(text), _) => SiteConfig::from_toml(text)?,
        (None, Some(name)) => match super::presets::by_name(name) {
            Some(text) => SiteConfig::from_toml(text)?,
            None => return Err(CampaignError::Validation(format!("unknown preset {name:?}")).into()),
        },
        (None, None) => super::presets::white_sands()?,
    };
    let mut spec = SessionSpec::new(&site, req.seed.unwrap_or(0))?;
    if let Some(id) = req.id {
        spec = spec.with_id(id);
    }
    if let Some(h) = req.hypothesis {
        spec = spec.with_hypothesis(h);
    }
    if let Some(g) = req.gait {
        spec = spec.with_gait(g);
    }
    let session = app.insert(Session::create(spec, app.clock)?)?;
    Ok((StatusCode::CREATED, Json(SessionView::of(&session))))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionView> {
    let s = app.snapshot(&id)?;
    Ok(Json(SessionView::of(&s)))
}

async fn plan(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<PlanRequest>,
) -> ApiResult<SessionView> {
    let (_, s) = app
        .write(&id, |s| {
            let mut xs = if req.flags { s.flags().to_vec() } else { Vec::new() };
            xs.extend(&req.locations);
            s.run_initial_plan(&xs, req.gait)
        })
        .await?;
    Ok(Json(SessionView::of(&s)))
}

async fn suggestions(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<SuggestQuery>,
) -> ApiResult<SuggestionRound> {
    let (round, _) = app.write(&id, |s| s.suggestions(q.k)).await?;
    Ok(Json(round))
}

async fn decision(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<DecisionRequest>,
) -> ApiResult<SessionView> {
    let (_, s) = app
        .write(&id, |s| {
            let round = s.state().autonomy.rounds.iter().find(|r| r.round == req.round);
            let suggestion = match (&req.suggestion, round) {
                (SuggestionRef::Full(sug), _) => Some(sug.clone()),
                (SuggestionRef::Location { location }, Some(r)) => r
                    .suggestions
                    .iter()
                    .find(|x| (x.location - location).abs() <= LOCATION_EPS)
                    .cloned(),
                (SuggestionRef::Rank { rank }, Some(r)) => r.suggestions.get(*rank).cloned(),
                (_, None) => {
                    return Err(SamplerError::StaleRound {
                        given: req.round,
                        latest: s.state().autonomy.latest_round().map(|r| r.round),
                    }
                    .into())
                }
            };
            let suggestion = suggestion
                .ok_or_else(|| CampaignError::Validation(format!("round {} has no such suggestion", req.round)))?;
            s.decide(DecisionRecord {
                round: req.round,
                suggestion,
                outcome: req.outcome.clone(),
                feedback: req.feedback.clone(),
            })?;
            if req.measure {
                s.measure_pending(req.gait)?;
            }
            Ok(())
        })
        .await?;
    Ok(Json(SessionView::of(&s)))
}

async fn curve(State(app): State<Arc<AppState>>, Path((id, mid)): Path<(String, u64)>) -> ApiResult<CurveView> {
    let s = app.snapshot(&id)?;
    let reading = s.reading(mid)?;
    Ok(Json(CurveView {
        measurement: s.measurement(mid)?.clone(),
        truth: reading.truth,
        estimate: reading.estimate,
        abort: reading.abort,
    }))
}

async fn belief(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<BeliefView> {
    let s = app.snapshot(&id)?;
    let belief = s.belief()?;
    let state = s.state();
    let points: Vec<(f64, f64)> = state
        .measurements
        .iter()
        .filter(|m| m.valid)
        .map(|m| (m.location, m.strength))
        .collect();
    let h = &state.spec.hypothesis;
    let fit = if points.len() >= 2 {
        fit_template(h, &points)
    } else {
        None
    };
    let hypothesis = fit.map(|f| belief.candidates.iter().map(|&x| f.predict(h, x)).collect());
    Ok(Json(BeliefView {
        belief,
        hypothesis,
        fit,
        confidence: s.confidence(),
    }))
}

async fn conclude(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<ConcludeRequest>>,
) -> ApiResult<SessionView> {
    let note = body.map(|b| b.0.note).unwrap_or_default();
    let (_, s) = app.write(&id, |s| s.conclude(note)).await?;
    Ok(Json(SessionView::of(&s)))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/plan", post(plan))
        .route("/sessions/{id}/suggestions", get(suggestions))
        .route("/sessions/{id}/decision", post(decision))
        .route("/sessions/{id}/curves/{measurement_id}", get(curve))
        .route("/sessions/{id}/belief", get(belief))
        .route("/sessions/{id}/conclude", post(conclude))
        .with_state(state)
}

/// Serve `store` on `addr` until the process is stopped.
pub async fn serve(store: Store, addr: SocketAddr) -> Result<(), CampaignError> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(AppState::new(store)))).await?;
    Ok(())
}
