//! Axum service around the streaming classifier.
//!
//! Sessions hold live engines for document-at-a-time streaming over HTTP;
//! the `/runs`, `/correlate` and `/gen-corpus` endpoints execute whole
//! experiments server-side against files the server can reach. Per-session
//! processing is serialized behind a mutex, matching the engine's
//! single-writer contract.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::sync::{Mutex, RwLock};

use clasher_api as api;
use clasher_core::engine::{self, StreamEngine};
use clasher_core::{corpus, Error as CoreError};

/// Shared server state: the session table.
#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<StreamEngine>>>>,
}

pub type SharedState = Arc<AppState>;

/// Service-level error with an HTTP status.
pub struct ServiceError {
    status: StatusCode,
    message: String,
}

impl ServiceError {
    fn not_found(session: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            message: format!("unknown session {session:?}"),
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(err: CoreError) -> Self {
        let status = match &err {
            CoreError::InvalidConfig(_)
            | CoreError::SnapshotFormat { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::NoRounds => StatusCode::BAD_REQUEST,
            CoreError::Io(_) | CoreError::Json(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            message: err.to_string(),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(api::ErrorBody {
                error: self.message,
            }),
        )
            .into_response()
    }
}

type ServiceResult<T> = Result<Json<T>, ServiceError>;

pub fn router() -> Router {
    router_with_state(Arc::new(AppState::default()))
}

pub fn router_with_state(state: SharedState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/sessions", post(create_session).get(list_sessions))
        .route("/v1/sessions/load", post(load_session))
        .route(
            "/v1/sessions/{id}",
            get(session_info).delete(delete_session),
        )
        .route("/v1/sessions/{id}/step", post(step))
        .route("/v1/sessions/{id}/predict", post(predict))
        .route("/v1/sessions/{id}/metrics", get(metrics))
        .route("/v1/sessions/{id}/model", get(model))
        .route("/v1/runs", post(run))
        .route("/v1/correlate", post(correlate))
        .route("/v1/gen-corpus", post(gen_corpus))
        .with_state(state)
}

async fn health() -> Json<api::HealthResponse> {
    Json(api::HealthResponse {
        status: "ok".into(),
    })
}

async fn insert_session(state: &SharedState, engine: StreamEngine) -> String {
    let id = uuid::Uuid::new_v4().to_string();
    state
        .sessions
        .write()
        .await
        .insert(id.clone(), Arc::new(Mutex::new(engine)));
    id
}

async fn lookup(state: &SharedState, id: &str) -> Result<Arc<Mutex<StreamEngine>>, ServiceError> {
    state
        .sessions
        .read()
        .await
        .get(id)
        .cloned()
        .ok_or_else(|| ServiceError::not_found(id))
}

async fn create_session(
    State(state): State<SharedState>,
    Json(request): Json<api::CreateSessionRequest>,
) -> ServiceResult<api::SessionCreated> {
    let engine = StreamEngine::new(request.config)?;
    let session = insert_session(&state, engine).await;
    tracing::info!(%session, "session created");
    Ok(Json(api::SessionCreated { session }))
}

async fn load_session(
    State(state): State<SharedState>,
    Json(request): Json<api::LoadSessionRequest>,
) -> ServiceResult<api::SessionCreated> {
    let engine = StreamEngine::from_snapshot(request.snapshot)?;
    let session = insert_session(&state, engine).await;
    tracing::info!(%session, "session restored from snapshot");
    Ok(Json(api::SessionCreated { session }))
}

fn info_of(id: &str, engine: &StreamEngine) -> api::SessionInfo {
    api::SessionInfo {
        session: id.to_string(),
        rounds: engine.rounds(),
        labels: engine.labels().len(),
        memory_bytes: engine.memory_bytes(),
        config: engine.config().clone(),
    }
}

async fn list_sessions(State(state): State<SharedState>) -> ServiceResult<api::SessionList> {
    let table = state.sessions.read().await;
    let mut sessions = Vec::with_capacity(table.len());
    for (id, entry) in table.iter() {
        let engine = entry.lock().await;
        sessions.push(info_of(id, &engine));
    }
    sessions.sort_by(|a, b| a.session.cmp(&b.session));
    Ok(Json(api::SessionList { sessions }))
}

async fn session_info(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> ServiceResult<api::SessionInfo> {
    let entry = lookup(&state, &id).await?;
    let engine = entry.lock().await;
    Ok(Json(info_of(&id, &engine)))
}

async fn delete_session(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ServiceError> {
    state
        .sessions
        .write()
        .await
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ServiceError::not_found(&id))
}

async fn step(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    Json(request): Json<api::StepRequest>,
) -> ServiceResult<api::StepResponse> {
    let entry = lookup(&state, &id).await?;
    let mut engine = entry.lock().await;
    let result = engine.step(&request.text, &request.labels)?;
    Ok(Json(api::StepResponse {
        id: request.id,
        round: result.round,
        predicted: result.predicted,
        trained: result.trained,
    }))
}

async fn predict(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    Json(request): Json<api::PredictRequest>,
) -> ServiceResult<api::PredictResponse> {
    let entry = lookup(&state, &id).await?;
    let engine = entry.lock().await;
    let predicted = engine.predict_only(&request.text)?;
    Ok(Json(api::PredictResponse { predicted }))
}

async fn metrics(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> ServiceResult<api::MetricsResponse> {
    let entry = lookup(&state, &id).await?;
    let engine = entry.lock().await;
    let summary = if engine.rounds() > 0 {
        Some(engine.summary()?)
    } else {
        None
    };
    Ok(Json(api::MetricsResponse {
        rounds: engine.rounds(),
        summary,
    }))
}

async fn model(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> ServiceResult<api::ModelSnapshot> {
    let entry = lookup(&state, &id).await?;
    let engine = entry.lock().await;
    Ok(Json(engine.snapshot()))
}

async fn run(Json(request): Json<api::RunRequest>) -> ServiceResult<api::RunReport> {
    let report = tokio::task::spawn_blocking(move || engine::run_prequential(&request))
        .await
        .map_err(|join| ServiceError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: format!("run task failed: {join}"),
        })??;
    Ok(Json(report))
}

async fn correlate(
    Json(request): Json<api::CorrelationRequest>,
) -> ServiceResult<api::CorrelationReport> {
    let report = tokio::task::spawn_blocking(move || engine::run_correlation(&request))
        .await
        .map_err(|join| ServiceError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: format!("correlation task failed: {join}"),
        })??;
    Ok(Json(report))
}

async fn gen_corpus(
    Json(request): Json<api::GenCorpusRequest>,
) -> ServiceResult<api::GenCorpusResponse> {
    let output = request.output.clone();
    let docs =
        tokio::task::spawn_blocking(move || corpus::write_jsonl(&request.spec, &request.output))
            .await
            .map_err(|join| ServiceError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                message: format!("corpus task failed: {join}"),
            })??;
    Ok(Json(api::GenCorpusResponse { docs, output }))
}

/// Bind and serve until the task is aborted. Prints the bound address so
/// callers binding port 0 can discover it.
pub async fn serve(addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    println!("listening on http://{local}");
    tracing::info!(%local, "service started");
    axum::serve(listener, router()).await
}
