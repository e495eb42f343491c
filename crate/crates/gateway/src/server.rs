//! HTTP and WebSocket front end of the drawing game.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use contourbench::game::{EventFlash, FieldParams, GameSession, SegmentOutcome, SessionStatus, SessionView};
use contourbench::stroke::{Dataset, Point};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use crate::boundary::field_for_image;
use crate::submissions::{SubmissionLog, SubmissionRecord};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub dataset_root: PathBuf,
    pub listen: SocketAddr,
    pub params: FieldParams,
    pub cutoff: f64,
}

impl ServiceConfig {
    pub fn submissions_dir(&self) -> PathBuf {
        self.dataset_root.join("submissions")
    }
}

pub struct AppState {
    dataset: Dataset,
    images: Vec<String>,
    next_image: AtomicUsize,
    params: FieldParams,
    cutoff: f64,
    sessions: RwLock<HashMap<String, Arc<Mutex<GameSession>>>>,
    log: SubmissionLog,
}

impl AppState {
    pub fn new(cfg: &ServiceConfig) -> anyhow::Result<Self> {
        cfg.params.validate()?;
        anyhow::ensure!(
            cfg.cutoff > 0.0 && cfg.cutoff <= 1.0,
            "cutoff must be in (0, 1], got {}",
            cfg.cutoff
        );
        let dataset = Dataset::open(&cfg.dataset_root)?;
        let images = dataset.image_ids()?;
        anyhow::ensure!(!images.is_empty(), "dataset {} has no images", cfg.dataset_root.display());
        let log = SubmissionLog::open(&cfg.submissions_dir())?;
        Ok(Self {
            dataset,
            images,
            next_image: AtomicUsize::new(0),
            params: cfg.params,
            cutoff: cfg.cutoff,
            sessions: RwLock::new(HashMap::new()),
            log,
        })
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<GameSession>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("session {id}")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("session is closed")]
    Closed,
    #[error("cannot build a reward field: {0}")]
    Field(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<contourbench::Error> for ApiError {
    fn from(e: contourbench::Error) -> Self {
        match e {
            contourbench::Error::SessionClosed => ApiError::Closed,
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Closed => StatusCode::CONFLICT,
            ApiError::Field(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

/// Messages a client sends, over WebSocket or the HTTP fallback.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    StrokePoints {
        points: Vec<Point>,
        /// Close the stroke after these points.
        #[serde(default)]
        end_stroke: bool,
    },
    StrokeEnd,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Score {
        delta: f64,
        score: f64,
        events: Vec<EventFlash>,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NextImage {
    pub image_id: String,
    pub image_url: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NewSession {
    pub image_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub status: SessionStatus,
    pub score_fraction: f64,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/images/next", get(next_image))
        .route("/images/{id}", get(image_file))
        .route("/session", post(create_session))
        .route("/session/{id}", get(session_view))
        .route("/session/{id}/stroke", post(post_stroke))
        .route("/session/{id}/stream", get(stream))
        .route("/session/{id}/submit", post(submit))
        .with_state(state)
}

pub async fn serve(cfg: ServiceConfig) -> anyhow::Result<()> {
    let state = Arc::new(AppState::new(&cfg)?);
    let listener = tokio::net::TcpListener::bind(cfg.listen)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {}: {e}", cfg.listen))?;
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(state)).await?;
    Ok(())
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn next_image(State(st): State<Arc<AppState>>) -> Json<NextImage> {
    let i = st.next_image.fetch_add(1, Ordering::Relaxed) % st.images.len();
    let image_id = st.images[i].clone();
    Json(NextImage {
        image_url: format!("/images/{image_id}"),
        image_id,
    })
}

async fn image_file(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    if !st.images.contains(&id) {
        return Err(ApiError::NotFound(format!("image {id}")));
    }
    let entry = st.dataset.entry(&id)?;
    let path = entry.image_path.ok_or_else(|| ApiError::NotFound(format!("image file for {id}")))?;
    let mime = match path.extension().and_then(|e| e.to_str()) {
        Some("png") => "image/png",
        _ => "image/jpeg",
    };
    let bytes = tokio::fs::read(&path).await.map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

async fn create_session(
    State(st): State<Arc<AppState>>,
    Json(req): Json<NewSession>,
) -> Result<Json<SessionCreated>, ApiError> {
    if !st.images.contains(&req.image_id) {
        return Err(ApiError::NotFound(format!("image {}", req.image_id)));
    }
    let seed: u64 = rand::random();
    let (state, image_id) = (st.clone(), req.image_id.clone());
    let field = tokio::task::spawn_blocking(move || field_for_image(&state.dataset, &image_id, &state.params, seed))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| ApiError::Field(e.to_string()))?;
    let session_id = uuid::Uuid::new_v4().to_string();
    let created = SessionCreated {
        session_id: session_id.clone(),
        width: field.width,
        height: field.height,
    };
    tracing::info!(session = %session_id, image = %req.image_id, seed, "session opened");
    let session = GameSession::new(session_id.clone(), field);
    st.sessions.write().await.insert(session_id, Arc::new(Mutex::new(session)));
    Ok(Json(created))
}

async fn session_view(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let s = st.session(&id).await?;
    let view = s.lock().await.view();
    Ok(Json(view))
}

fn apply(session: &mut GameSession, msg: ClientMessage) -> Result<ServerMessage, ApiError> {
    let outcome = match msg {
        ClientMessage::StrokePoints { points, end_stroke } => {
            let out = session.score_segment(&points)?;
            if end_stroke {
                session.end_stroke()?;
            }
            out
        }
        ClientMessage::StrokeEnd => {
            session.end_stroke()?;
            SegmentOutcome {
                delta: 0.0,
                events: vec![],
            }
        }
    };
    Ok(ServerMessage::Score {
        delta: outcome.delta,
        score: session.score(),
        events: outcome.events.iter().map(|e| e.flash()).collect(),
    })
}

async fn post_stroke(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(msg): Json<ClientMessage>,
) -> Result<Json<ServerMessage>, ApiError> {
    let s = st.session(&id).await?;
    let mut guard = s.lock().await;
    Ok(Json(apply(&mut guard, msg)?))
}

async fn stream(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let session = st.session(&id).await?;
    Ok(ws.on_upgrade(move |socket| run_stream(socket, session)))
}

async fn run_stream(mut socket: WebSocket, session: Arc<Mutex<GameSession>>) {
    while let Some(Ok(msg)) = socket.recv().await {
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        let reply = match serde_json::from_str::<ClientMessage>(&text) {
            Ok(m) => {
                let mut guard = session.lock().await;
                apply(&mut guard, m).unwrap_or_else(|e| ServerMessage::Error { message: e.to_string() })
            }
            Err(e) => ServerMessage::Error {
                message: format!("bad message: {e}"),
            },
        };
        let body = serde_json::to_string(&reply).expect("server messages serialize");
        if socket.send(Message::Text(body.into())).await.is_err() {
            break;
        }
    }
}

async fn submit(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SubmitResponse>, ApiError> {
    let s = st.session(&id).await?;
    let mut guard = s.lock().await;
    if guard.status() != SessionStatus::Open {
        return Err(ApiError::Closed);
    }
    let drawing = guard.drawing(None)?;
    let verdict = guard.finalize(st.cutoff)?;
    let record = SubmissionRecord {
        timestamp: Utc::now(),
        image_id: guard.image_id().to_owned(),
        session_id: id.clone(),
        drawing,
        score_fraction: verdict.score_fraction,
        status: verdict.status,
    };
    drop(guard);
    st.log
        .append(record)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    tracing::info!(session = %id, status = ?verdict.status, fraction = verdict.score_fraction, "submission");
    Ok(Json(SubmitResponse {
        status: verdict.status,
        score_fraction: verdict.score_fraction,
    }))
}
