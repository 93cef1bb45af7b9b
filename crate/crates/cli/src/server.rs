//! HTTP API over the workflow store.
//!
//! Authentication is one static bearer token per role; the caller's user id
//! comes from the `X-User` header and defaults to the role name. Mutations
//! need `If-Match: <version>` and `Idempotency-Key`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use oversight_core::service::{Service, ServiceError};
use oversight_core::workflow::{Actor, ItemState, ReviewDecision, Role, WorkflowError, WorkflowEvent, WorkflowItem};
use oversight_core::AspectKind;

use crate::model::SharedClient;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub data_dir: Option<PathBuf>,
    pub annotator_token: String,
    pub reviewer_token: String,
    pub manager_token: String,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: None,
            annotator_token: "annotator-token".into(),
            reviewer_token: "reviewer-token".into(),
            manager_token: "manager-token".into(),
        }
    }
}

impl ServeConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn tokens(&self) -> Vec<(String, Role)> {
        vec![
            (self.annotator_token.clone(), Role::Annotator),
            (self.reviewer_token.clone(), Role::Reviewer),
            (self.manager_token.clone(), Role::Manager),
        ]
    }
}

struct Cached {
    fingerprint: String,
    status: StatusCode,
    body: Value,
}

struct Inner {
    svc: Service<SharedClient>,
    replies: HashMap<String, Cached>,
}

pub struct AppState {
    inner: Mutex<Inner>,
    tokens: Vec<(String, Role)>,
}

impl AppState {
    pub fn new(svc: Service<SharedClient>, tokens: Vec<(String, Role)>) -> Arc<Self> {
        Arc::new(Self { inner: Mutex::new(Inner { svc, replies: HashMap::new() }), tokens })
    }

    /// Number of events the store has applied.
    pub fn event_count(&self) -> u64 {
        self.inner.lock().svc.store().last_event_id
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    fn body(&self) -> Value {
        json!({ "error": self.code, "message": self.message })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<WorkflowError> for ApiError {
    fn from(e: WorkflowError) -> Self {
        let (status, code) = match &e {
            WorkflowError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            WorkflowError::VersionConflict { .. } => (StatusCode::CONFLICT, "version_conflict"),
            WorkflowError::RoleViolation(_) => (StatusCode::FORBIDDEN, "role_violation"),
            WorkflowError::InvalidTransition { .. } => (StatusCode::CONFLICT, "invalid_transition"),
            WorkflowError::OrderingViolation { .. } => (StatusCode::CONFLICT, "ordering_violation"),
            WorkflowError::ImmutableItem(_) => (StatusCode::CONFLICT, "immutable_item"),
            WorkflowError::Duplicate(_) => (StatusCode::CONFLICT, "duplicate"),
            WorkflowError::SetIncomplete { .. } => (StatusCode::CONFLICT, "set_incomplete"),
            WorkflowError::InvalidInput(_) | WorkflowError::Prompt(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
            WorkflowError::Gateway(_) => (StatusCode::BAD_GATEWAY, "model_unavailable"),
            WorkflowError::CorruptLog(_) => (StatusCode::INTERNAL_SERVER_ERROR, "corrupt_log"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Workflow(w) => w.into(),
            other => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", other.to_string()),
        }
    }
}

fn authenticate(state: &AppState, headers: &HeaderMap) -> Result<Actor, ApiError> {
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing bearer token"))?;
    let role = state
        .tokens
        .iter()
        .find(|(t, _)| t == token.trim())
        .map(|(_, r)| *r)
        .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "unknown token"))?;
    let user = match headers.get("x-user").and_then(|v| v.to_str().ok()).map(str::trim) {
        Some(u) if !u.is_empty() => u.to_string(),
        _ => role_name(role).to_string(),
    };
    Ok(Actor::new(role, user))
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Annotator => "annotator",
        Role::Reviewer => "reviewer",
        Role::Manager => "manager",
        Role::System => "system",
    }
}

fn expected_version(headers: &HeaderMap) -> Result<u64, ApiError> {
    let raw = headers
        .get(header::IF_MATCH)
        .ok_or_else(|| ApiError::new(StatusCode::PRECONDITION_REQUIRED, "if_match_required", "If-Match header is required"))?;
    let text = raw.to_str().unwrap_or("").trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse().map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad_if_match", format!("If-Match {text:?} is not a version")))
}

async fn blocking<T, F>(state: Arc<AppState>, f: F) -> Result<T, ApiError>
where
    F: FnOnce(&mut Inner) -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&mut state.inner.lock()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

fn with_etag(item: &WorkflowItem, body: Value, status: StatusCode) -> Response {
    let mut resp = (status, Json(body)).into_response();
    if let Ok(v) = HeaderValue::from_str(&format!("\"{}\"", item.version)) {
        resp.headers_mut().insert(header::ETAG, v);
    }
    resp
}

#[derive(Debug, Deserialize)]
pub struct QueueQuery {
    role: Option<String>,
    aspect: Option<String>,
}

#[derive(Debug, Serialize)]
struct QueueEntry {
    item_id: String,
    video_id: String,
    aspect: AspectKind,
    state: ItemState,
    version: u64,
    iteration: u32,
}

fn actionable(inner: &Inner, item: &WorkflowItem, role: Role, user: &str) -> bool {
    let store = inner.svc.store();
    match role {
        Role::Annotator => {
            let mine = item.annotator.as_deref().map_or(true, |a| a == user);
            mine && match item.state {
                ItemState::PrimitivesReady => store.ordering_gate(item).is_ok(),
                ItemState::PreCaptioned | ItemState::AwaitingCritique | ItemState::PostCaptioned | ItemState::Rejected => true,
                _ => false,
            }
        }
        Role::Reviewer => {
            matches!(item.state, ItemState::Submitted | ItemState::InReview) && item.annotator.as_deref() != Some(user)
        }
        Role::Manager => item.state == ItemState::Appealed,
        Role::System => !item.state.is_terminal(),
    }
}

async fn queue(State(state): State<Arc<AppState>>, headers: HeaderMap, Query(q): Query<QueueQuery>) -> Result<Response, ApiError> {
    let actor = authenticate(&state, &headers)?;
    let role = match q.role.as_deref() {
        Some(r) => Role::parse(r).ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "bad_role", format!("unknown role {r:?}")))?,
        None => actor.role,
    };
    let aspect = match q.aspect.as_deref() {
        Some(a) => Some(a.parse::<AspectKind>().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_aspect", e.to_string()))?),
        None => None,
    };
    blocking(state, move |inner| {
        let entries: Vec<QueueEntry> = inner
            .svc
            .store()
            .items
            .values()
            .filter(|i| aspect.map_or(true, |a| i.aspect == a))
            .filter(|i| actionable(inner, i, role, &actor.user_id))
            .map(|i| QueueEntry {
                item_id: i.item_id.clone(),
                video_id: i.video_id.clone(),
                aspect: i.aspect,
                state: i.state,
                version: i.version,
                iteration: i.iteration,
            })
            .collect();
        Ok(Json(entries).into_response())
    })
    .await
}

async fn get_item(State(state): State<Arc<AppState>>, headers: HeaderMap, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    authenticate(&state, &headers)?;
    blocking(state, move |inner| {
        let item = inner.svc.store().get(&id)?;
        Ok(with_etag(item, serde_json::to_value(item).expect("item serializes"), StatusCode::OK))
    })
    .await
}

#[derive(Deserialize)]
struct CritiqueBody {
    critique: String,
}

#[derive(Deserialize)]
struct FinalizeBody {
    score: u8,
    /// Self-reported by the client.
    #[serde(default)]
    minutes: Option<f64>,
}

#[derive(Deserialize)]
struct ReviewBody {
    decision: ReviewDecision,
    #[serde(default)]
    corrections: Option<String>,
}

#[derive(Deserialize)]
struct AppealBody {
    #[serde(default)]
    note: Option<String>,
    /// Manager resolution.
    #[serde(default)]
    accept: Option<bool>,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Value) -> Result<T, ApiError> {
    serde_json::from_value(body.clone()).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", e.to_string()))
}

fn perform(inner: &mut Inner, id: &str, action: &str, body: &Value, actor: &Actor, version: u64) -> Result<Vec<WorkflowEvent>, ApiError> {
    let svc = &mut inner.svc;
    let v = Some(version);
    let events = match action {
        "precaption" => svc.mutate(|wf| wf.generate_precaption(id, actor, v))?,
        "critique" => {
            let b: CritiqueBody = parse_body(body)?;
            if b.critique.trim().is_empty() {
                return Err(WorkflowError::InvalidInput("empty critique".into()).into());
            }
            if actor.role != Role::Annotator {
                return Err(WorkflowError::RoleViolation(format!("{:?} cannot critique", actor.role)).into());
            }
            if svc.store().get(id)?.state == ItemState::PostCaptioned {
                let mut evs = svc.mutate(|wf| wf.reopen(id, actor, v))?;
                evs.extend(svc.mutate(|wf| wf.submit_critique(id, &b.critique, actor, None))?);
                evs
            } else {
                svc.mutate(|wf| wf.submit_critique(id, &b.critique, actor, v))?
            }
        }
        "finalize" => {
            let b: FinalizeBody = parse_body(body)?;
            svc.mutate(|wf| wf.finalize(id, b.score, b.minutes, actor, v))?
        }
        "submit" => svc.mutate(|wf| wf.submit(id, actor, v))?,
        "review" => {
            let b: ReviewBody = parse_body(body)?;
            svc.mutate(|wf| wf.review(id, b.decision, b.corrections.as_deref(), actor, v))?
        }
        "appeal" => {
            let b: AppealBody = parse_body(body)?;
            match (actor.role, b.accept) {
                (Role::Manager, Some(accept)) => svc.mutate(|wf| wf.resolve_appeal(id, accept, b.note.as_deref(), actor, v))?,
                (Role::Manager, None) => {
                    return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", "manager resolution needs \"accept\""))
                }
                _ => svc.mutate(|wf| wf.appeal(id, b.note.as_deref().unwrap_or(""), actor, v))?,
            }
        }
        other => return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_action", format!("no action {other:?}"))),
    };
    Ok(events)
}

async fn post_item(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    UrlPath(rest): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let actor = authenticate(&state, &headers)?;
    let (id, action) = rest
        .rsplit_once('/')
        .map(|(i, a)| (i.to_string(), a.to_string()))
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_action", "missing action"))?;
    let key = headers
        .get("idempotency-key")
        .and_then(|v| v.to_str().ok())
        .filter(|k| !k.trim().is_empty())
        .map(str::to_string)
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "idempotency_key_required", "Idempotency-Key header is required"))?;
    let body: Value = if body.iter().all(u8::is_ascii_whitespace) {
        json!({})
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_json", e.to_string()))?
    };
    let version = expected_version(&headers);
    blocking(state, move |inner| {
        let cache_key = format!("{}\u{0}{}\u{0}{key}", role_name(actor.role), actor.user_id);
        let fingerprint = format!("{rest}\u{0}{body}");
        if let Some(c) = inner.replies.get(&cache_key) {
            if c.fingerprint != fingerprint {
                return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "idempotency_key_reused", "key was used for a different request"));
            }
            return Ok((c.status, Json(c.body.clone())).into_response());
        }
        let version = version?;
        let (status, reply) = match perform(inner, &id, &action, &body, &actor, version) {
            Ok(events) => {
                let item = inner.svc.store().get(&id).map_err(ApiError::from)?;
                (StatusCode::OK, json!({ "item": item, "events": events }))
            }
            Err(e) => (e.status, e.body()),
        };
        if !status.is_server_error() {
            inner.replies.insert(cache_key, Cached { fingerprint, status, body: reply.clone() });
        }
        let mut resp = (status, Json(&reply)).into_response();
        if let Some(v) = reply.pointer("/item/version").and_then(Value::as_u64) {
            if let Ok(hv) = HeaderValue::from_str(&format!("\"{v}\"")) {
                resp.headers_mut().insert(header::ETAG, hv);
            }
        }
        Ok(resp)
    })
    .await
}

async fn stats(State(state): State<Arc<AppState>>, headers: HeaderMap) -> Result<Response, ApiError> {
    authenticate(&state, &headers)?;
    blocking(state, |inner| Ok(Json(inner.svc.stats()).into_response())).await
}

async fn ledger(State(state): State<Arc<AppState>>, headers: HeaderMap, UrlPath(user): UrlPath<String>) -> Result<Response, ApiError> {
    authenticate(&state, &headers)?;
    blocking(state, move |inner| Ok(Json(inner.svc.ledger_for(&user)).into_response())).await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/queue", get(queue))
        .route("/items/*rest", get(get_item).post(post_item))
        .route("/stats", get(stats))
        .route("/ledger/:user", get(ledger))
        .with_state(state)
}

pub async fn serve_listener(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn serve(cfg: ServeConfig, client: SharedClient) -> anyhow::Result<()> {
    let svc = match &cfg.data_dir {
        Some(dir) => Service::open(dir, client).with_context(|| format!("opening store {}", dir.display()))?,
        None => Service::in_memory(client),
    };
    let state = AppState::new(svc, cfg.tokens());
    let listener = tokio::net::TcpListener::bind(cfg.addr).await.with_context(|| format!("binding {}", cfg.addr))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_listener(listener, state).await?;
    Ok(())
}
