//! JSON API over one annotation round. Label and adjudication writes are
//! serialized through the session mutex and synced to disk before the
//! response is sent.

use std::collections::HashSet;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use rarevoice::classifier::{CalibrationSource, Label, TrainedClassifier};
use rarevoice::corpus::Corpus;
use rarevoice::embeddings::CommentVectorMap;
use rarevoice::harness::{rank_wild, AnnotationSession, HarnessError, LabelValue, LABEL_DEFINITION};
use rarevoice::sampling::predict_pool;

use crate::error::CliError;

/// Model and pool used by the rank endpoint.
pub struct RankContext {
    pub model: TrainedClassifier,
    pub corpus: Arc<Corpus>,
    pub vectors: Option<CommentVectorMap>,
    pub labeled_ids: HashSet<String>,
}

pub struct AppState {
    pub session: Mutex<AnnotationSession>,
    pub rank: Option<RankContext>,
}

pub struct ApiError {
    status: StatusCode,
    error: CliError,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, error: CliError::new(code, message) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.error;
        (self.status, Json(json!({ "code": e.code, "message": e.message, "details": e.details }))).into_response()
    }
}

impl From<HarnessError> for ApiError {
    fn from(e: HarnessError) -> Self {
        let status = match &e {
            HarnessError::NotInBatch { .. } | HarnessError::NothingToAdjudicate(_) => StatusCode::UNPROCESSABLE_ENTITY,
            HarnessError::EmptyAnnotator => StatusCode::BAD_REQUEST,
            HarnessError::AlreadyLabeled { .. }
            | HarnessError::AlreadyAdjudicated(_)
            | HarnessError::TooManyAnnotators(_)
            | HarnessError::RoundIncomplete
            | HarnessError::Unresolved(_)
            | HarnessError::Incomplete { .. }
            | HarnessError::AnnotatorCount(_) => StatusCode::CONFLICT,
            HarnessError::CorruptLog { .. } | HarnessError::Io(_) | HarnessError::Json(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError { status, error: e.into() }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn lock(state: &AppState) -> std::sync::MutexGuard<'_, AnnotationSession> {
    // a panic while holding the lock cannot leave a half-written record: the
    // log keeps only complete lines
    state.session.lock().unwrap_or_else(|p| p.into_inner())
}

#[derive(Deserialize)]
struct AnnotatorQuery {
    annotator: Option<String>,
}

async fn batch(State(state): State<Arc<AppState>>, q: Result<Query<AnnotatorQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q?;
    let annotator = q.annotator.unwrap_or_default();
    let session = lock(&state);
    let items = session.items_for(&annotator)?;
    let labeled = items.iter().filter(|i| i.label.is_some()).count();
    let items: Vec<Value> = items
        .into_iter()
        .enumerate()
        .map(|(position, i)| json!({ "comment_id": i.comment_id, "text": i.text, "position": position + 1, "label": i.label }))
        .collect();
    let b = session.batch();
    Ok(Json(json!({
        "round": b.round,
        "strategy": b.strategy,
        "annotator": annotator,
        "items": items,
        "progress": { "labeled": labeled, "total": b.comment_ids.len() },
    })))
}

#[derive(Deserialize)]
struct LabelBody {
    comment_id: String,
    label: LabelValue,
    annotator: Option<String>,
}

async fn post_label(
    State(state): State<Arc<AppState>>,
    q: Result<Query<AnnotatorQuery>, QueryRejection>,
    body: Result<Json<LabelBody>, JsonRejection>,
) -> ApiResult {
    let Query(q) = q?;
    let Json(body) = body?;
    let annotator = body.annotator.or(q.annotator).unwrap_or_default();
    let rec = lock(&state).record_label(&annotator, &body.comment_id, body.label)?;
    Ok(Json(serde_json::to_value(rec).expect("record serializes")))
}

async fn progress(State(state): State<Arc<AppState>>) -> ApiResult {
    Ok(Json(serde_json::to_value(lock(&state).progress()).expect("progress serializes")))
}

async fn agreement(State(state): State<Arc<AppState>>) -> ApiResult {
    let report = lock(&state).agreement()?;
    Ok(Json(serde_json::to_value(report).expect("report serializes")))
}

async fn disagreements(State(state): State<Arc<AppState>>) -> ApiResult {
    let list = lock(&state).disagreements()?;
    Ok(Json(json!({ "disagreements": list })))
}

#[derive(Deserialize)]
struct AdjudicateBody {
    comment_id: String,
    resolved_label: Label,
    #[serde(default)]
    note: String,
}

async fn adjudicate(State(state): State<Arc<AppState>>, body: Result<Json<AdjudicateBody>, JsonRejection>) -> ApiResult {
    let Json(body) = body?;
    let rec = lock(&state).adjudicate(&body.comment_id, body.resolved_label, body.note)?;
    Ok(Json(serde_json::to_value(rec).expect("record serializes")))
}

#[derive(Deserialize)]
struct RankQuery {
    top: Option<usize>,
}

async fn rank(State(state): State<Arc<AppState>>, q: Result<Query<RankQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q?;
    let Some(ctx) = &state.rank else {
        return Err(ApiError::new(StatusCode::CONFLICT, "no_model", "the service was started without a model"));
    };
    let top = q.top.unwrap_or(100);
    let ids: Vec<String> =
        ctx.corpus.comments().iter().filter(|c| !ctx.labeled_ids.contains(&c.id)).map(|c| c.id.clone()).collect();
    let probs = predict_pool(&ctx.model, &ctx.corpus, &ids, ctx.vectors.as_ref())
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, error: e.into() })?;
    let items: Vec<Value> = rank_wild(&probs, &ctx.labeled_ids, top)
        .into_iter()
        .enumerate()
        .map(|(i, (id, p))| {
            let text = ctx.corpus.comment(&id).map(|c| c.text.clone()).unwrap_or_default();
            json!({ "rank": i + 1, "comment_id": id, "prob_positive": p, "text": text })
        })
        .collect();
    let calibration = match ctx.model.calibration_source {
        CalibrationSource::HeldOut => "held_out",
        CalibrationSource::InSample => "in_sample",
    };
    Ok(Json(json!({ "top": top, "calibration": calibration, "items": items })))
}

async fn definition() -> ApiResult {
    Ok(Json(serde_json::from_str(LABEL_DEFINITION).expect("definition is valid JSON")))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/batch", get(batch))
        .route("/api/labels", post(post_label))
        .route("/api/progress", get(progress))
        .route("/api/agreement", get(agreement))
        .route("/api/disagreements", get(disagreements))
        .route("/api/adjudicate", post(adjudicate))
        .route("/api/rank", get(rank))
        .route("/api/definition", get(definition))
        .fallback(not_found)
        .with_state(state)
}
