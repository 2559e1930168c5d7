//! REST routes. Handlers move the blocking work onto the blocking pool.

use crate::error::ServiceError;
use crate::service::{CandidateView, FeedbackInput, InsightsView, NewSession, Service, SessionView};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use nbiig_core::analytics::AnalysisType;
use nbiig_core::fusion::ExportFormat;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        (status, Json(self.payload())).into_response()
    }
}

type ApiResult<T> = Result<T, ServiceError>;

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/insights", get(get_insights).post(add_insight))
        .route("/sessions/{id}/insights/{iid}", patch(edit_insight))
        .route("/sessions/{id}/report", post(generate_report))
        .route("/reports/{id}", get(get_report))
        .route("/feedback", post(post_feedback))
        .with_state(service)
}

async fn blocking<T, F>(svc: Arc<Service>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::Validation(e.body_text()))
}

fn idempotency_key(headers: &HeaderMap) -> ApiResult<Option<String>> {
    match headers.get(IDEMPOTENCY_HEADER) {
        None => Ok(None),
        Some(v) => v
            .to_str()
            .ok()
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .map(|k| Some(k.to_string()))
            .ok_or_else(|| ServiceError::Validation("invalid Idempotency-Key header".into())),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(svc): State<Arc<Service>>,
    headers: HeaderMap,
    payload: Result<Json<NewSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req = body(payload)?;
    let key = idempotency_key(&headers)?;
    let view = blocking(svc, move |s| {
        s.idempotent(key.as_deref(), "POST /sessions", &req, || s.create_session(&req).map(|x| x.to_view()))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    blocking(svc, move |s| s.session(&id).map(|x| Json(x.to_view()))).await
}

async fn get_insights(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Json<InsightsView>> {
    blocking(svc, move |s| s.session(&id).map(|x| Json(x.insights()))).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EditRequest {
    pub text: String,
}

async fn edit_insight(
    State(svc): State<Arc<Service>>,
    Path((id, iid)): Path<(String, String)>,
    headers: HeaderMap,
    payload: Result<Json<EditRequest>, JsonRejection>,
) -> ApiResult<Json<CandidateView>> {
    let req = body(payload)?;
    let key = idempotency_key(&headers)?;
    blocking(svc, move |s| {
        let scope = format!("PATCH /sessions/{id}/insights/{iid}");
        s.idempotent(key.as_deref(), &scope, &req, || s.edit_insight(&id, &iid, &req.text))
    })
    .await
    .map(Json)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AddRequest {
    pub text: String,
    #[serde(default)]
    pub insight_type: Option<AnalysisType>,
}

async fn add_insight(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<AddRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<CandidateView>)> {
    let req = body(payload)?;
    let key = idempotency_key(&headers)?;
    let view = blocking(svc, move |s| {
        let scope = format!("POST /sessions/{id}/insights");
        s.idempotent(key.as_deref(), &scope, &req, || s.add_insight(&id, &req.text, req.insight_type))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportRequest {
    pub selected_ids: Vec<String>,
}

async fn generate_report(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<ReportRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<nbiig_core::fusion::Report>)> {
    let req = body(payload)?;
    let key = idempotency_key(&headers)?;
    let report = blocking(svc, move |s| {
        let scope = format!("POST /sessions/{id}/report");
        s.idempotent(key.as_deref(), &scope, &req, || s.generate_report(&id, &req.selected_ids))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(report)))
}

#[derive(Debug, Deserialize)]
pub struct ReportQuery {
    pub format: Option<String>,
}

async fn get_report(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let format = q
        .format
        .map(|f| f.parse::<ExportFormat>().map_err(ServiceError::Validation))
        .transpose()?;
    blocking(svc, move |s| match format {
        None => s.report(&id).map(|r| Json(r).into_response()),
        Some(f) => {
            let bytes = s.export_report(&id, f)?;
            let mime = match f {
                ExportFormat::Plain => "text/plain; charset=utf-8",
                ExportFormat::Markdown => "text/markdown; charset=utf-8",
            };
            Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
        }
    })
    .await
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeedbackRequest {
    One(FeedbackInput),
    Many(Vec<FeedbackInput>),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeedbackResponse {
    pub logged: usize,
}

async fn post_feedback(
    State(svc): State<Arc<Service>>,
    headers: HeaderMap,
    payload: Result<Json<FeedbackRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<FeedbackResponse>)> {
    let req = body(payload)?;
    let key = idempotency_key(&headers)?;
    let resp = blocking(svc, move |s| {
        let inputs = match &req {
            FeedbackRequest::One(i) => std::slice::from_ref(i),
            FeedbackRequest::Many(v) => v.as_slice(),
        };
        s.idempotent(key.as_deref(), "POST /feedback", &req, || {
            s.record_feedback(inputs).map(|e| FeedbackResponse { logged: e.len() })
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(resp)))
}
