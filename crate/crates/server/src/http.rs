//! HTTP/JSON service.
//!
//! | method | path              | body                | reply               |
//! |--------|-------------------|---------------------|---------------------|
//! | GET    | `/health`         |                     | status and version  |
//! | POST   | `/pdm`            | `GenerateRequest`   | `Pdm`               |
//! | POST   | `/plan`           | `PlanRequest`       | `PlanResponse`      |
//! | POST   | `/eval/pod`       | `PodRequest`        | `PodResponse`       |
//! | POST   | `/eval/dtf`       | `DtfRequest`        | `DtfResult`         |
//! | POST   | `/compare`        | `CompareRequest`    | `CompareResponse`   |
//! | POST   | `/env/{session}`  | `EnvRequest`        | `EnvResponse`       |
//!
//! Environment sessions are created by their first request and dropped on
//! `close`. Operation errors come back as `{"error": ".."}` with status 400
//! for bad input and 500 otherwise.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tokio::net::TcpListener;
use tracing::info;

use wisar_core::env::EnvConfig;
use wisar_core::protocol::{
    CompareRequest, CompareResponse, DtfRequest, DtfResponse, EnvCommand, EnvReply, EnvRequest, EnvResponse,
    EnvSession, GenerateRequest, PlanRequest, PlanResponse, PodRequest, PodResponse, PROTOCOL_VERSION,
};
use wisar_core::pdm::Pdm;

use crate::{ops, ServerError};

#[derive(Debug)]
pub struct AppState {
    env_config: EnvConfig,
    sessions: Mutex<HashMap<String, EnvSession>>,
}

impl AppState {
    pub fn new(env_config: EnvConfig) -> Result<Self, ServerError> {
        env_config.validate()?;
        Ok(Self { env_config, sessions: Mutex::new(HashMap::new()) })
    }
}

pub struct ApiError(wisar_core::Error);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        use wisar_core::Error as E;
        let status = match self.0 {
            E::Invalid(_) | E::UnsupportedDegree { .. } | E::EmptyGrid | E::UnknownAlgorithm(_) | E::ZeroMass | E::Json(_) => {
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs a CPU-bound operation off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> wisar_core::Result<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map(Json).map_err(ApiError),
        Err(e) => Err(ApiError(wisar_core::Error::Io(std::io::Error::other(e)))),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/pdm", post(generate))
        .route("/plan", post(plan))
        .route("/eval/pod", post(pod))
        .route("/eval/dtf", post(dtf))
        .route("/compare", post(compare))
        .route("/env/{session}", post(env))
        .with_state(state)
}

pub async fn serve_http(listener: TcpListener, env_config: EnvConfig) -> Result<(), ServerError> {
    let state = Arc::new(AppState::new(env_config)?);
    info!(addr = %listener.local_addr()?, "http service listening");
    axum::serve(listener, router(state)).await?;
    Ok(())
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "protocol": PROTOCOL_VERSION }))
}

async fn generate(Json(req): Json<GenerateRequest>) -> ApiResult<Pdm> {
    blocking(move || ops::generate(&req)).await
}

async fn plan(Json(req): Json<PlanRequest>) -> ApiResult<PlanResponse> {
    blocking(move || ops::plan(&req)).await
}

async fn pod(Json(req): Json<PodRequest>) -> ApiResult<PodResponse> {
    blocking(move || ops::pod(&req)).await
}

async fn dtf(Json(req): Json<DtfRequest>) -> ApiResult<DtfResponse> {
    blocking(move || ops::dtf(&req)).await
}

async fn compare(Json(req): Json<CompareRequest>) -> ApiResult<CompareResponse> {
    blocking(move || ops::compare(&req)).await
}

async fn env(State(state): State<Arc<AppState>>, Path(id): Path<String>, Json(req): Json<EnvRequest>) -> Json<EnvResponse> {
    let mut sessions = state.sessions.lock().expect("session lock poisoned");
    if req.command == EnvCommand::Close {
        let known = sessions.remove(&id).is_some();
        return Json(if known { EnvReply::Closed.into() } else { EnvResponse::error(format!("no session {id}")) });
    }
    let session = sessions
        .entry(id)
        .or_insert_with(|| EnvSession::new(state.env_config.clone()).expect("config validated"));
    Json(session.handle(req))
}
