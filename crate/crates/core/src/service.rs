//! HTTP inference service over a model bundle.
//!
//! Handlers read an immutable bundle snapshot; a reload swaps the whole
//! snapshot under a write lock, so a request sees either the old bundle or
//! the new one.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{Duration, SystemTime};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use crate::bundle::{Bundle, FieldError, PredictRequest};
use crate::data_model::Task;
use crate::error::{Error, Result};

/// Environment variable that overrides the listening port.
pub const PORT_ENV: &str = "CONCERT_PLANNER_PORT";
pub const DEFAULT_ADDRESS: &str = "127.0.0.1:8080";

pub struct ServiceState {
    bundle: RwLock<Arc<Bundle>>,
}

impl ServiceState {
    pub fn new(bundle: Bundle) -> Arc<Self> {
        Arc::new(ServiceState { bundle: RwLock::new(Arc::new(bundle)) })
    }

    pub fn snapshot(&self) -> Arc<Bundle> {
        self.bundle.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, bundle: Bundle) {
        *self.bundle.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(bundle);
    }
}

enum ApiError {
    Syntax(String),
    Field(FieldError),
    Model(Error),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::Syntax(message) => {
                (StatusCode::BAD_REQUEST, Json(json!({ "error": { "kind": "malformed_body", "message": message } }))).into_response()
            }
            ApiError::Field(e) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "error": { "kind": "invalid_field", "field": e.field, "message": e.message } })),
            )
                .into_response(),
            ApiError::Model(e) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                Json(json!({ "error": { "kind": e.kind(), "message": e.to_string() } })),
            )
                .into_response(),
        }
    }
}

fn parse_request(body: &[u8]) -> std::result::Result<PredictRequest, ApiError> {
    let body = if body.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { body };
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            ApiError::Syntax(inner.to_string())
        } else {
            let field = if path == "." {
                // unknown top-level keys carry the name in the message
                inner.to_string().split('`').nth(1).unwrap_or("body").to_string()
            } else {
                path
            };
            ApiError::Field(FieldError::new(&field, inner.to_string()))
        }
    })
}

async fn health(State(state): State<Arc<ServiceState>>) -> Json<serde_json::Value> {
    let b = state.snapshot();
    Json(json!({
        "status": "ok",
        "format_version": b.format_version,
        "tool_version": b.metadata.tool_version,
    }))
}

/// Metadata, hyperparameters, scores and city-class centroids.
pub fn model_card(b: &Bundle) -> serde_json::Value {
    let task_card = |task: Task| {
        b.predictor(task).ok().map(|p| {
            json!({
                "family": p.family().name(),
                "input_columns": p.preprocessor.columns,
                "scores": p.scores,
                "hyperparameters": b.metadata.hyperparameters.get(task.name()),
            })
        })
    };
    json!({
        "format_version": b.format_version,
        "metadata": b.metadata,
        "location": task_card(Task::Location),
        "price": task_card(Task::Price),
        "classes": b.class_centroids(),
        "default_day": b.default_day,
        "defaults": b.defaults,
    })
}

async fn card(State(state): State<Arc<ServiceState>>) -> Json<serde_json::Value> {
    Json(model_card(&state.snapshot()))
}

async fn predict_location(State(state): State<Arc<ServiceState>>, body: Bytes) -> std::result::Result<Response, ApiError> {
    let req = parse_request(&body)?;
    let b = state.snapshot();
    let x = b.rows_from_requests(&[req]).map_err(ApiError::Field)?;
    let mut out = b.predict_location(&x).map_err(ApiError::Model)?;
    Ok(Json(out.remove(0)).into_response())
}

async fn predict_price(State(state): State<Arc<ServiceState>>, body: Bytes) -> std::result::Result<Response, ApiError> {
    let req = parse_request(&body)?;
    let b = state.snapshot();
    let x = b.rows_from_requests(&[req]).map_err(ApiError::Field)?;
    let mut out = b.predict_price(&x).map_err(ApiError::Model)?;
    Ok(Json(out.remove(0)).into_response())
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/model-card", get(card))
        .route("/predict/location", post(predict_location))
        .route("/predict/price", post(predict_price))
        .with_state(state)
}

/// `address` with its port replaced by `$CONCERT_PLANNER_PORT` when set.
pub fn resolve_address(address: &str) -> Result<SocketAddr> {
    let mut addr: SocketAddr = address.parse().map_err(|_| crate::error::invalid(format!("bad address `{address}`")))?;
    if let Ok(port) = std::env::var(PORT_ENV) {
        let port: u16 = port.trim().parse().map_err(|_| crate::error::invalid(format!("{PORT_ENV} is not a port: `{port}`")))?;
        addr.set_port(port);
    }
    Ok(addr)
}

fn modified(path: &PathBuf) -> Option<SystemTime> {
    std::fs::metadata(path).and_then(|m| m.modified()).ok()
}

/// Reloads the bundle whenever the file's modification time changes. A
/// bundle that fails to load is reported and the old snapshot kept.
pub async fn watch_bundle(state: Arc<ServiceState>, path: PathBuf, every: Duration) {
    let mut seen = modified(&path);
    let mut tick = tokio::time::interval(every);
    loop {
        tick.tick().await;
        let now = modified(&path);
        if now.is_some() && now != seen {
            seen = now;
            match Bundle::load(&path) {
                Ok(b) => {
                    state.replace(b);
                    eprintln!("reloaded bundle {}", path.display());
                }
                Err(e) => eprintln!("keeping previous bundle, reload failed: {e}"),
            }
        }
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(state: Arc<ServiceState>, addr: SocketAddr, bundle_path: Option<PathBuf>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    if let Some(path) = bundle_path {
        tokio::spawn(watch_bundle(state.clone(), path, Duration::from_secs(2)));
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
