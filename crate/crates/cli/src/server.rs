//! HTTP surface of the review service.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gapcheck_core::review::{Answer, ReviewError, ReviewService};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::{ServeDir, ServeFile};

const PLACEHOLDER: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>gapcheck review</title></head>\n<body><h1>gapcheck review service</h1><p>No UI bundle is configured. Start the service with <code>--static-dir</code> pointing at a built bundle, or use the JSON API under <code>/api</code>.</p></body></html>\n";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerBody {
    axiom_set: Vec<String>,
    answer: Answer,
    reviewer: String,
}

struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let status = match &e {
            ReviewError::UnknownCase(_) | ReviewError::UnknownSolution { .. } => StatusCode::NOT_FOUND,
            ReviewError::NotPending { .. } | ReviewError::ConflictingAnswer { .. } => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type Shared = State<Arc<ReviewService>>;

async fn health(State(svc): Shared) -> Json<serde_json::Value> {
    let cases = svc.read(|s| s.dataset().len());
    Json(json!({ "status": "ok", "cases": cases }))
}

async fn list_cases(State(svc): Shared) -> Response {
    Json(svc.read(|s| s.summaries())).into_response()
}

async fn get_case(State(svc): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.read(|s| s.detail(&id))?).into_response())
}

async fn post_answer(State(svc): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let body: AnswerBody =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed answer: {e}")))?;
    if body.axiom_set.is_empty() {
        return Err(ApiError::bad_request("axiom_set must not be empty"));
    }
    let detail = tokio::task::spawn_blocking(move || {
        svc.answer(&id, &body.axiom_set, body.answer, &body.reviewer)?;
        svc.read(|s| s.detail(&id))
    })
    .await
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: e.to_string(),
    })??;
    Ok(Json(detail).into_response())
}

async fn report(State(svc): Shared) -> Response {
    Json(svc.read(|s| s.report())).into_response()
}

async fn api_not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        message: "no such endpoint".into(),
    }
}

/// API routes plus static files at `/` (a placeholder page when no bundle
/// directory is given).
pub fn router(service: Arc<ReviewService>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/cases", get(list_cases))
        .route("/cases/{id}", get(get_case))
        .route("/cases/{id}/answers", axum::routing::post(post_answer))
        .route("/report", get(report))
        .fallback(api_not_found)
        .with_state(service);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            app.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => app.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}
