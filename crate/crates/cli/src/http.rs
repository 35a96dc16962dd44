//! JSON-over-HTTP service backed by a shared [`Pipeline`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use reqrag_core::fusion::FusionError;
use reqrag_core::orchestrator::OrchestratorError;
use reqrag_core::pipeline::{Pipeline, PipelineError, QueryFlags};
use serde::Deserialize;
use serde_json::json;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBody {
    pub query: String,
    #[serde(default)]
    pub flags: QueryFlags,
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Input(_) | PipelineError::Fusion(FusionError::EmptyQuery) => StatusCode::BAD_REQUEST,
            PipelineError::Fusion(FusionError::Config(_)) | PipelineError::MissingIndex(_) => StatusCode::BAD_REQUEST,
            PipelineError::Generation(OrchestratorError::Exhausted { .. }) => StatusCode::BAD_GATEWAY,
            PipelineError::Embedding(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

pub fn router(pipeline: Arc<Pipeline>) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/ingest", post(ingest))
        .route("/provenance/{id}", get(provenance))
        .route("/health", get(health))
        .route("/metrics", get(metrics))
        .with_state(pipeline)
}

async fn query(
    State(p): State<Arc<Pipeline>>,
    body: Result<Json<QueryBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))?;
    if body.query.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "field `query`: must not be empty"));
    }
    // generation may block on provider calls and retry sleeps
    let outcome = tokio::task::spawn_blocking(move || p.query(&body.query, &body.flags)).await??;
    let provenance_id = outcome.answer.as_ref().map(|a| a.provenance_id.clone());
    Ok(Json(json!({
        "query": outcome.query,
        "answer": outcome.answer,
        "sources": outcome.sources,
        "provenance_id": provenance_id,
        "timings": outcome.timings,
    }))
    .into_response())
}

async fn ingest(State(p): State<Arc<Pipeline>>, body: Bytes) -> Result<Response, ApiError> {
    let raw = std::str::from_utf8(&body).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "body is not UTF-8"))?;
    let raw = raw.to_string();
    let ids = tokio::task::spawn_blocking(move || p.stage_record(&raw)).await??;
    Ok((StatusCode::ACCEPTED, Json(json!({ "chunk_ids": ids, "staged": true }))).into_response())
}

async fn provenance(State(p): State<Arc<Pipeline>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    match p.provenance().get(&id) {
        Some(record) => Ok(Json(record).into_response()),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("no provenance record {id:?}"))),
    }
}

async fn health(State(p): State<Arc<Pipeline>>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "name": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "chunks": p.chunks().len(),
        "lexical_index": p.lexical().is_some(),
        "vector_index": p.vectors().is_some(),
    }))
}

async fn metrics(State(p): State<Arc<Pipeline>>) -> Json<reqrag_core::pipeline::MetricsSnapshot> {
    Json(p.metrics())
}

/// Bind and serve until ctrl-c.
pub async fn serve(pipeline: Arc<Pipeline>, bind: &str) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(pipeline))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
