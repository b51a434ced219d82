use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kitchen_core::{Action, AgentId, RunRecord, TaskBundle};
use kitchen_harness::ResultStore;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::session::{Participant, Phase, Session, SessionError};

/// Error body: `{"error": code, "message": detail}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({"error": self.code, "message": self.message})),
        )
            .into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let (status, code) = match &e {
            SessionError::UnknownAgent(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown-agent"),
            SessionError::NotHuman(_) => (StatusCode::FORBIDDEN, "unauthorized-agent"),
            SessionError::Participants(_) => (StatusCode::UNPROCESSABLE_ENTITY, "participants"),
            SessionError::Finished
            | SessionError::RunOver
            | SessionError::Lobby
            | SessionError::InProgress => (StatusCode::CONFLICT, "wrong-state"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

struct Entry {
    token: String,
    session: tokio::sync::Mutex<Session>,
}

/// Shared server state: live sessions and the results file.
#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Entry>>>>,
    store: Arc<Mutex<ResultStore>>,
    create_token: Option<String>,
}

impl AppState {
    /// `create_token`, when set, is required as a bearer token to open
    /// sessions.
    pub fn new(results: &Path, create_token: Option<String>) -> std::io::Result<AppState> {
        Ok(AppState {
            sessions: Arc::default(),
            store: Arc::new(Mutex::new(ResultStore::open(results)?)),
            create_token,
        })
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(
                    StatusCode::NOT_FOUND,
                    "no-session",
                    format!("no session `{id}`"),
                )
            })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/actions", post(submit))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

fn random_token() -> String {
    format!("{:032x}", rand::random::<u128>())
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(axum::http::header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
}

fn check_token(expected: &str, given: Option<&str>) -> Result<(), ApiError> {
    if given == Some(expected) {
        Ok(())
    } else {
        Err(ApiError::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing or wrong bearer token",
        ))
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "schema", e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    bundle: serde_json::Value,
    #[serde(default)]
    participants: Option<BTreeMap<AgentId, Participant>>,
    #[serde(default)]
    operator: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub token: String,
    pub phase: Phase,
    pub n_agents: usize,
}

async fn create(
    State(app): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    if let Some(t) = &app.create_token {
        check_token(t, bearer(&headers))?;
    }
    let req: CreateRequest = parse_body(&body)?;
    let bundle = TaskBundle::from_json(&req.bundle.to_string()).map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid-bundle",
            e.to_string(),
        )
    })?;
    let id = random_token();
    let token = random_token();
    let n_agents = bundle.n_agents;
    let session = Session::new(
        id.clone(),
        Arc::new(bundle),
        req.participants,
        req.operator.unwrap_or_else(|| "human".into()),
    )?;
    let entry = Arc::new(Entry {
        token: token.clone(),
        session: tokio::sync::Mutex::new(session),
    });
    app.sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), entry);
    tracing::info!(session = %id, "created");
    Ok((
        StatusCode::CREATED,
        Json(Created {
            id,
            token,
            phase: Phase::Lobby,
            n_agents,
        }),
    ))
}

async fn get_state(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let entry = app.entry(&id)?;
    check_token(&entry.token, bearer(&headers))?;
    let view = entry.session.lock().await.view();
    Ok(Json(view).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionRequest {
    agent: AgentId,
    action: Action,
}

async fn submit(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let entry = app.entry(&id)?;
    check_token(&entry.token, bearer(&headers))?;
    let req: ActionRequest = parse_body(&body)?;
    let reply = entry.session.lock().await.submit(req.agent, req.action)?;
    Ok(Json(reply).into_response())
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FinalizeRequest {
    #[serde(default)]
    abandon: bool,
}

#[derive(Serialize, Deserialize)]
pub struct Finalized {
    pub record: RunRecord,
}

async fn finalize(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Finalized>, ApiError> {
    let entry = app.entry(&id)?;
    check_token(&entry.token, bearer(&headers))?;
    let req: FinalizeRequest = if body.iter().all(u8::is_ascii_whitespace) {
        FinalizeRequest::default()
    } else {
        parse_body(&body)?
    };
    let mut session = entry.session.lock().await;
    let (record, row) = session.finalize(req.abandon)?;
    if let Some(row) = row {
        app.store
            .lock()
            .expect("results store lock")
            .append(&row)
            .map_err(|e| {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "store", e.to_string())
            })?;
        tracing::info!(session = %id, success = record.success, "finalized");
    }
    Ok(Json(Finalized { record }))
}

#[derive(Deserialize)]
struct WsQuery {
    token: Option<String>,
}

/// Browsers cannot set headers on a WebSocket handshake, so the token may
/// also come as `?token=`.
async fn events(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<WsQuery>,
    headers: HeaderMap,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let entry = app.entry(&id)?;
    check_token(&entry.token, bearer(&headers).or(q.token.as_deref()))?;
    Ok(ws.on_upgrade(move |socket| stream_frames(socket, entry)))
}

async fn stream_frames(mut socket: WebSocket, entry: Arc<Entry>) {
    let (snapshot, mut rx) = entry.session.lock().await.subscribe();
    let text = serde_json::to_string(&snapshot).expect("frames serialize");
    if socket.send(Message::Text(text.into())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            frame = rx.recv() => match frame {
                Ok(text) => {
                    if socket.send(Message::Text(text.as_ref().into())).await.is_err() {
                        return;
                    }
                }
                Err(RecvError::Lagged(n)) => {
                    // Order would be broken; make the client resubscribe.
                    tracing::warn!("subscriber lagged by {n} frames");
                    let _ = socket.send(Message::Close(None)).await;
                    return;
                }
                Err(RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
