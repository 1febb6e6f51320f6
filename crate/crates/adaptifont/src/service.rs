//! HTTP/JSON API driving live reading sessions.
//!
//! Requests for different sessions run concurrently. Each session sits
//! behind its own async mutex, and all work on it (proposals, font builds,
//! persistence) runs on the blocking pool while that lock is held, so a slow
//! session never stalls the others. Every state change is written to the
//! session's event log before the response is sent.

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use adaptifont_core::analysis::{analyze, labeled_points, AnalysisError, ClusterOptions};
use adaptifont_core::fontgen::{build_font, BuildOptions, SynthFont};
use adaptifont_core::fontspace::FontBasis;
use adaptifont_core::session::{
    McPrompt, Session, SessionConfig, SessionError, SessionMode, Submission, TextItem, TrialIssue, TrialOutcome,
};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex as AsyncMutex;

use crate::error::Error;
use crate::formats::{glyph_path_data, svg_font};
use crate::store::{valid_session_id, SessionStore};

/// Milliseconds on a clock shared by every session of one service.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64)
    })
}

pub const IDEMPOTENCY_KEY: &str = "idempotency-key";
pub const REPLAYED_HEADER: &str = "idempotent-replayed";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiGlyph {
    #[serde(rename = "char")]
    pub ch: char,
    pub path_data: String,
    pub advance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiFont {
    pub units_per_em: f64,
    pub glyphs: Vec<ApiGlyph>,
}

/// A trial as the reader sees it before the gate opens; the text itself is
/// fetched separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiTrialPayload {
    pub trial_id: u64,
    pub index: usize,
    pub n_trials: usize,
    pub text_id: String,
    pub category: String,
    pub gate_delay_ms: u64,
    pub text: Option<String>,
    pub has_question: bool,
    pub reissue_of: Option<u64>,
    pub font: ApiFont,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiText {
    pub trial_id: u64,
    pub text: String,
    pub word_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<McPrompt>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiSubmission {
    pub duration_ms: f64,
    pub press_count: u32,
    #[serde(default)]
    pub mc_answer: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiFeedback {
    pub word_count: usize,
    pub press_count: u32,
    pub expected_detections: u32,
    pub detection_accuracy: f64,
    pub mc_correct: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiResult {
    pub trial_id: u64,
    pub wpm: f64,
    pub score: i64,
    pub feedback: ApiFeedback,
    pub session_complete: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct CreateSessionRequest {
    /// Name of a stored configuration, `<data dir>/configs/<name>.json`.
    #[serde(default)]
    pub config_ref: Option<String>,
    /// Session configuration fields; anything missing takes its default.
    #[serde(default)]
    pub inline: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub session_id: String,
    pub n_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        use SessionError as E;
        let (status, code) = match &e {
            E::CorpusTooSmall { .. } | E::InvalidConfig(_) => (StatusCode::BAD_REQUEST, "invalid_config"),
            E::Complete => (StatusCode::CONFLICT, "session_complete"),
            E::UnknownTrial(_) => (StatusCode::NOT_FOUND, "unknown_trial"),
            E::TrialNotActive(_) => (StatusCode::CONFLICT, "trial_not_active"),
            E::GateClosed { .. } => (StatusCode::TOO_EARLY, "gate_closed"),
            E::NotReading(_) => (StatusCode::CONFLICT, "not_reading"),
            E::InvalidDuration(_) => (StatusCode::BAD_REQUEST, "invalid_duration"),
            E::MissingAnswer(_) => (StatusCode::BAD_REQUEST, "missing_answer"),
            E::AnswerOutOfRange { .. } => (StatusCode::BAD_REQUEST, "answer_out_of_range"),
            E::ConflictingSubmission(_) => (StatusCode::CONFLICT, "conflicting_submission"),
            E::ReplayMismatch(_) | E::InfeasibleOracle(_) | E::Optimizer(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Session(s) => s.into(),
            other => Self::internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorEnvelope {
            error: ErrorBody {
                code: self.code.into(),
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

pub struct ServiceConfig {
    pub basis: Arc<FontBasis>,
    /// Texts for sessions whose configuration brings none.
    pub texts: Vec<TextItem>,
    pub defaults: SessionConfig,
    pub build: BuildOptions,
    pub store: SessionStore,
    pub clock: Clock,
}

struct LiveSession {
    session: Session,
    fonts: HashMap<u64, Arc<SynthFont>>,
    /// Idempotency key → (request fingerprint, response body).
    replies: HashMap<String, (String, serde_json::Value)>,
}

struct Inner {
    config: ServiceConfig,
    glyphs: BTreeSet<char>,
    sessions: Mutex<HashMap<String, Arc<AsyncMutex<LiveSession>>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let glyphs = config.basis.layout.glyphs.iter().map(|g| g.ch).collect();
        Self(Arc::new(Inner {
            config,
            glyphs,
            sessions: Mutex::new(HashMap::new()),
        }))
    }

    fn now(&self) -> u64 {
        (self.0.config.clock)()
    }
}

const FONT_CACHE: usize = 16;

impl LiveSession {
    fn new(session: Session) -> Self {
        Self {
            session,
            fonts: HashMap::new(),
            replies: HashMap::new(),
        }
    }

    fn font(&mut self, trial_id: u64, cfg: &ServiceConfig) -> Result<Arc<SynthFont>, ApiError> {
        if let Some(f) = self.fonts.get(&trial_id) {
            return Ok(f.clone());
        }
        let issue = self
            .session
            .find_issue(trial_id)
            .ok_or(SessionError::UnknownTrial(trial_id))?;
        let opts = BuildOptions {
            name: Some(format!("{} trial {trial_id}", self.session.id())),
            ..cfg.build.clone()
        };
        let font = build_font(&issue.coords, &cfg.basis, &opts).map_err(|e| ApiError::internal(e.to_string()))?;
        if self.fonts.len() >= FONT_CACHE {
            self.fonts.clear();
        }
        let font = Arc::new(font);
        self.fonts.insert(trial_id, font.clone());
        Ok(font)
    }

    fn payload(&mut self, issue: &TrialIssue, cfg: &ServiceConfig) -> Result<ApiTrialPayload, ApiError> {
        let font = self.font(issue.trial_id, cfg)?;
        Ok(ApiTrialPayload {
            trial_id: issue.trial_id,
            index: issue.index,
            n_trials: self.session.config().n_trials,
            text_id: issue.text_id.clone(),
            category: issue.category.clone(),
            gate_delay_ms: issue.gate_delay_ms,
            text: None,
            has_question: issue.has_question,
            reissue_of: issue.reissue_of,
            font: ApiFont {
                units_per_em: font.units_per_em,
                glyphs: font
                    .outlines
                    .iter()
                    .map(|g| ApiGlyph {
                        ch: g.ch,
                        path_data: glyph_path_data(g),
                        advance: g.advance_width,
                    })
                    .collect(),
            },
        })
    }

    /// Logs pending events; on failure the in-memory state is discarded so
    /// the next request recovers from what actually reached the disk.
    fn persist(&mut self, state: &AppState) -> Result<(), ApiError> {
        if let Err(e) = state.0.config.store.persist(&mut self.session) {
            state.0.sessions.lock().unwrap().remove(self.session.id());
            return Err(ApiError::internal(format!("could not log session state: {e}")));
        }
        Ok(())
    }
}

async fn blocking<R: Send + 'static>(f: impl FnOnce() -> Result<R, ApiError> + Send + 'static) -> Result<R, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn session_handle(state: &AppState, id: &str) -> Result<Arc<AsyncMutex<LiveSession>>, ApiError> {
    let unknown = || ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id:?}"));
    if !valid_session_id(id) {
        return Err(unknown());
    }
    if let Some(h) = state.0.sessions.lock().unwrap().get(id) {
        return Ok(h.clone());
    }
    let st = state.clone();
    let owned = id.to_string();
    let loaded = blocking(move || st.0.config.store.load(&owned).map_err(ApiError::from)).await?;
    let session = loaded.ok_or_else(unknown)?;
    let mut map = state.0.sessions.lock().unwrap();
    Ok(map
        .entry(id.to_string())
        .or_insert_with(|| Arc::new(AsyncMutex::new(LiveSession::new(session))))
        .clone())
}

/// Runs `f` on the blocking pool with exclusive access to the session.
async fn with_session<R: Send + 'static>(
    state: &AppState,
    id: &str,
    f: impl FnOnce(&mut LiveSession, &AppState) -> Result<R, ApiError> + Send + 'static,
) -> Result<R, ApiError> {
    let handle = session_handle(state, id).await?;
    let mut guard = handle.lock_owned().await;
    let st = state.clone();
    blocking(move || f(&mut guard, &st)).await
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let slice: &[u8] = if body.is_empty() { b"{}" } else { body };
    serde_json::from_slice(slice).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn build_config(state: &AppState, req: CreateSessionRequest) -> Result<SessionConfig, ApiError> {
    let cfg = &state.0.config;
    let mut value = serde_json::to_value(&cfg.defaults).map_err(|e| ApiError::internal(e.to_string()))?;
    let overlay = |base: &mut serde_json::Value, patch: serde_json::Value| -> Result<(), ApiError> {
        let serde_json::Value::Object(patch) = patch else {
            return Err(ApiError::bad_request("configuration must be a JSON object"));
        };
        let obj = base.as_object_mut().expect("config serializes to an object");
        obj.extend(patch);
        Ok(())
    };
    let mut seeded = false;
    if let Some(name) = req.config_ref {
        if !valid_session_id(&name) {
            return Err(ApiError::bad_request(format!("invalid config_ref {name:?}")));
        }
        let path = cfg.store.root().join("configs").join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).map_err(|_| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                "unknown_config",
                format!("no stored config {name:?}"),
            )
        })?;
        let patch: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| ApiError::bad_request(format!("stored config {name:?}: {e}")))?;
        seeded |= patch.get("seed").is_some();
        overlay(&mut value, patch)?;
    }
    if let Some(patch) = req.inline {
        seeded |= patch.get("seed").is_some();
        overlay(&mut value, patch)?;
    }
    let mut config: SessionConfig = serde_json::from_value(value)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", e.to_string()))?;
    if !seeded {
        config.seed = uuid::Uuid::new_v4().as_u64_pair().0;
    }
    if config.texts.is_empty() {
        config.texts = cfg.texts.clone();
    }
    config.mode = SessionMode::Live;
    let missing: BTreeSet<char> = config
        .texts
        .iter()
        .flat_map(|t| t.body.chars())
        .filter(|c| !c.is_whitespace() && !state.0.glyphs.contains(c))
        .collect();
    if !missing.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "unsupported_characters",
            format!("texts use characters the font space has no glyph for: {missing:?}"),
        ));
    }
    Ok(config)
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSessionRequest = parse_body(&body)?;
    let config = build_config(&state, req)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let now = state.now();
    let st = state.clone();
    let session_id = id.clone();
    let live = blocking(move || {
        let mut session = Session::start(session_id, config, now)?;
        st.0.config.store.persist(&mut session)?;
        Ok(session)
    })
    .await?;
    let n_trials = live.config().n_trials;
    state
        .0
        .sessions
        .lock()
        .unwrap()
        .insert(id.clone(), Arc::new(AsyncMutex::new(LiveSession::new(live))));
    Ok((
        StatusCode::CREATED,
        Json(CreateSessionResponse {
            session_id: id,
            n_trials,
        }),
    )
        .into_response())
}

async fn get_trial(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ApiTrialPayload>, ApiError> {
    let now = state.now();
    with_session(&state, &id, move |live, st| {
        let issue = live.session.current_trial(now)?;
        live.persist(st)?;
        live.payload(&issue, &st.0.config)
    })
    .await
    .map(Json)
}

async fn get_text(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ApiText>, ApiError> {
    let now = state.now();
    with_session(&state, &id, move |live, st| {
        let (issue, _) = live
            .session
            .active_trial()
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no_active_trial", "no trial has been issued"))?;
        let view = live.session.open_text(issue.trial_id, now)?;
        live.persist(st)?;
        Ok(ApiText {
            trial_id: view.trial_id,
            text: view.text,
            word_count: view.word_count,
            question: view.question,
        })
    })
    .await
    .map(Json)
}

/// Replays the stored reply for a repeated idempotency key, or runs `f` and
/// stores its reply under the key.
fn idempotent(
    live: &mut LiveSession,
    key: Option<String>,
    fingerprint: String,
    f: impl FnOnce(&mut LiveSession) -> Result<(serde_json::Value, bool), ApiError>,
) -> Result<(serde_json::Value, bool), ApiError> {
    if let Some(k) = &key {
        if let Some((fp, body)) = live.replies.get(k) {
            if *fp != fingerprint {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "idempotency_key_reused",
                    "idempotency key was used for a different request",
                ));
            }
            return Ok((body.clone(), true));
        }
    }
    let (body, replayed) = f(live)?;
    if let Some(k) = key {
        live.replies.insert(k, (fingerprint, body.clone()));
    }
    Ok((body, replayed))
}

fn replay_response(body: serde_json::Value, replayed: bool) -> Response {
    let mut resp = Json(body).into_response();
    if replayed {
        resp.headers_mut()
            .insert(REPLAYED_HEADER, HeaderValue::from_static("true"));
    }
    resp
}

fn idempotency_key(headers: &HeaderMap) -> Option<String> {
    headers
        .get(IDEMPOTENCY_KEY)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
}

fn result_body(outcome: &TrialOutcome, complete: bool) -> ApiResult {
    ApiResult {
        trial_id: outcome.trial_id,
        wpm: outcome.wpm,
        score: outcome.score,
        feedback: ApiFeedback {
            word_count: outcome.word_count,
            press_count: outcome.press_count,
            expected_detections: outcome.expected_detections,
            detection_accuracy: outcome.detection_accuracy,
            mc_correct: outcome.mc_correct,
        },
        session_complete: complete,
    }
}

async fn post_result(
    State(state): State<AppState>,
    Path((id, tid)): Path<(String, u64)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let sub: ApiSubmission = parse_body(&body)?;
    let key = idempotency_key(&headers);
    let fingerprint = format!("result/{tid}/{}", String::from_utf8_lossy(&body));
    let now = state.now();
    let (body, replayed) = with_session(&state, &id, move |live, st| {
        idempotent(live, key, fingerprint, |live| {
            let submission = Submission {
                duration_ms: sub.duration_ms,
                press_count: sub.press_count,
                mc_answer: sub.mc_answer,
            };
            let (outcome, replayed) = live.session.submit_result(tid, submission, now)?;
            live.persist(st)?;
            let body = result_body(&outcome, live.session.is_complete());
            Ok((serde_json::to_value(body).expect("serializable"), replayed))
        })
    })
    .await?;
    Ok(replay_response(body, replayed))
}

async fn post_reset(
    State(state): State<AppState>,
    Path((id, tid)): Path<(String, u64)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let key = idempotency_key(&headers);
    let now = state.now();
    let (body, replayed) = with_session(&state, &id, move |live, st| {
        idempotent(live, key, format!("reset/{tid}"), |live| {
            let (issue, replayed) = live.session.reset_trial(tid, now)?;
            live.persist(st)?;
            let payload = live.payload(&issue, &st.0.config)?;
            Ok((serde_json::to_value(payload).expect("serializable"), replayed))
        })
    })
    .await?;
    Ok(replay_response(body, replayed))
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
struct AnalysisQuery {
    min_pts: Option<usize>,
    xi: Option<f64>,
    raw: Option<bool>,
}

async fn get_analysis(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<AnalysisQuery>,
) -> Result<Response, ApiError> {
    let defaults = ClusterOptions::default();
    let opts = ClusterOptions {
        min_pts: q.min_pts.unwrap_or(defaults.min_pts),
        xi: q.xi.unwrap_or(defaults.xi),
        standardize: !q.raw.unwrap_or(false),
        ..defaults
    };
    let report = with_session(&state, &id, move |live, st| {
        let events = st.0.config.store.events(live.session.id())?;
        analyze(&labeled_points(&events), &opts).map_err(|e| match e {
            AnalysisError::TooFewPoints { .. } => {
                ApiError::new(StatusCode::CONFLICT, "insufficient_data", e.to_string())
            }
            AnalysisError::InvalidParameter(_) => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other.to_string()),
        })
    })
    .await?;
    Ok(Json(report).into_response())
}

async fn get_font(
    State(state): State<AppState>,
    Path((id, file)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let tid: u64 = file
        .strip_suffix(".svg")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no font {file:?}")))?;
    let svg = with_session(&state, &id, move |live, st| {
        Ok(svg_font(&*live.font(tid, &st.0.config)?))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/trial", get(get_trial))
        .route("/api/session/{id}/trial/text", get(get_text))
        .route("/api/session/{id}/trial/{tid}/result", post(post_result))
        .route("/api/session/{id}/trial/{tid}/reset", post(post_reset))
        .route("/api/session/{id}/analysis", get(get_analysis))
        .route("/api/session/{id}/font/{file}", get(get_font))
        .fallback(not_found)
        .with_state(state)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<(), Error> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(Error::io(PathBuf::from(addr.to_string())))?;
    log::info!("listening on {}", listener.local_addr().map_err(Error::io("listener"))?);
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(Error::io("server"))
}
