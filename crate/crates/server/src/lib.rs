//! HTTP session server for driving a diagram by hand.
//!
//! Every response carries a full [`Snapshot`] computed by the interpreter,
//! so a client only renders what it receives. The routes:
//!
//! | method | path | body |
//! |---|---|---|
//! | `POST` | `/api/sessions` | `{"source": "...", "format": "emuc"}` or empty |
//! | `GET` | `/api/sessions/{id}` | |
//! | `DELETE` | `/api/sessions/{id}` | |
//! | `POST` | `/api/sessions/{id}/fire` | `{"trigger": "..."}` |
//! | `POST` | `/api/sessions/{id}/reset` | |
//! | `GET` | `/api/sessions/{id}/replay` | debug builds only |
//!
//! Anything else falls through to the static asset directory, if one is
//! configured.

mod error;
mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use emuc_core::parser::{parse_diagram, parse_diagram_json};
use emuc_core::{accept, CheckedDiagram};
use serde::Deserialize;
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use session::{HistoryEntry, Session, SessionStore, Snapshot, TriggerView, VariableView};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// Used when a create request has no body.
    pub default_model: Option<Arc<CheckedDiagram>>,
    pub idle_timeout: Duration,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            default_model: None,
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub sessions: Arc<SessionStore>,
    default_model: Option<Arc<CheckedDiagram>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelFormat {
    Emuc,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    source: String,
    #[serde(default = "default_format")]
    format: ModelFormat,
}

fn default_format() -> ModelFormat {
    ModelFormat::Emuc
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FireRequest {
    trigger: String,
}

/// Parses and checks a model payload; any error diagnostic rejects it.
pub fn load_model(source: &str, json: bool) -> Result<CheckedDiagram, ApiError> {
    let parsed = if json {
        parse_diagram_json(source)
    } else {
        parse_diagram(source)
    };
    let diagram = parsed.map_err(ApiError::InvalidModel)?;
    let accepted = accept(&diagram).map_err(ApiError::InvalidModel)?;
    Ok(accepted.diagram)
}

async fn create(State(app): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let diagram = if body.iter().all(u8::is_ascii_whitespace) {
        app.default_model.clone().ok_or(ApiError::NoModel)?
    } else {
        let req: CreateRequest =
            serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        Arc::new(load_model(
            &req.source,
            matches!(req.format, ModelFormat::Json),
        )?)
    };
    let session = app.sessions.insert(diagram);
    let snapshot = session.lock().await.snapshot(false);
    tracing::debug!(session = %snapshot.session, diagram = %snapshot.diagram, "created");
    Ok((StatusCode::CREATED, Json(snapshot)))
}

async fn show(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Snapshot>, ApiError> {
    let session = app.sessions.get(&id)?;
    let snapshot = session.lock().await.snapshot(true);
    Ok(Json(snapshot))
}

async fn delete(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    app.sessions.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn fire(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Snapshot>, ApiError> {
    let session = app.sessions.get(&id)?;
    let req: FireRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let mut session = session.lock().await;
    session.fire(&req.trigger)?;
    Ok(Json(session.snapshot(false)))
}

async fn reset(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Snapshot>, ApiError> {
    let session = app.sessions.get(&id)?;
    let mut session = session.lock().await;
    session.reset();
    Ok(Json(session.snapshot(false)))
}

#[cfg(debug_assertions)]
async fn replay(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let session = app.sessions.get(&id)?;
    let session = session.lock().await;
    Ok(Json(serde_json::json!({
        "consistent": session.replay_matches(),
        "steps": session.history.len(),
    })))
}

pub fn app_state(config: &ServerConfig) -> AppState {
    AppState {
        sessions: Arc::new(SessionStore::new(config.idle_timeout)),
        default_model: config.default_model.clone(),
    }
}

pub fn router(config: &ServerConfig, state: AppState) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(show).delete(delete))
        .route("/api/sessions/{id}/fire", post(fire))
        .route("/api/sessions/{id}/reset", post(reset));
    #[cfg(debug_assertions)]
    let api = api.route("/api/sessions/{id}/replay", get(replay));
    let api = api.with_state(state);
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Periodically drops idle sessions. Abort the handle to stop it.
pub fn spawn_evictor(store: Arc<SessionStore>) -> tokio::task::JoinHandle<()> {
    let period = (store.idle_timeout() / 4).max(Duration::from_millis(100));
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(period);
        loop {
            ticker.tick().await;
            let evicted = store.evict_idle(Instant::now());
            if evicted > 0 {
                tracing::info!(evicted, "idle sessions dropped");
            }
        }
    })
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let state = app_state(&config);
    let evictor = spawn_evictor(state.sessions.clone());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let result = axum::serve(listener, router(&config, state)).await;
    evictor.abort();
    result
}
