use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use recast_core::{
    annotate, generate_span_alternatives, score_span, tokenize, CandidateSource, Document,
    Error as CoreError, ScoredText, Span, SuggestionSet, Thresholds, ToxicityBackend,
    MAX_INPUT_BYTES,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;

use crate::feedback::{FeedbackError, FeedbackRecord};
use crate::AppState;

pub const MAX_COMMENT_BYTES: usize = 5_000;

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    TooLarge(String),
    Unprocessable(String),
    Loading,
    Busy,
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::TooLarge(_) => StatusCode::PAYLOAD_TOO_LARGE,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Loading | ApiError::Busy => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn message(&self) -> String {
        match self {
            ApiError::BadRequest(m)
            | ApiError::TooLarge(m)
            | ApiError::Unprocessable(m)
            | ApiError::Internal(m) => m.clone(),
            ApiError::Loading => "model is still loading".into(),
            ApiError::Busy => "feedback queue is full, retry later".into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let ApiError::Internal(m) = &self {
            tracing::error!("{m}");
        }
        (self.status(), Json(json!({ "error": self.message() }))).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InputTooLarge { .. } => ApiError::TooLarge(e.to_string()),
            CoreError::SpanOutOfBounds { .. } | CoreError::SpanTooLong { .. } => {
                ApiError::Unprocessable(e.to_string())
            }
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<FeedbackError> for ApiError {
    fn from(e: FeedbackError) -> Self {
        match e {
            FeedbackError::Busy => ApiError::Busy,
            other => ApiError::Internal(other.to_string()),
        }
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn ser_round3<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round3(*x))
}

/// Toxicity in [0, 1] as a percentage with three decimals.
pub fn score_0_100(toxicity: f64) -> f64 {
    round3(toxicity * 100.0)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))
}

fn check_text(text: &str) -> Result<(), ApiError> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(ApiError::TooLarge(format!(
            "text is {} bytes, limit is {MAX_INPUT_BYTES}",
            text.len()
        )));
    }
    Ok(())
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))?
}

#[derive(Deserialize)]
struct TextRequest {
    text: String,
}

#[derive(Deserialize)]
struct SpanRequest {
    text: String,
    span: Span,
}

#[derive(Deserialize)]
struct FeedbackRequest {
    text: String,
    comment: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TokenView {
    pub text: String,
    pub byte_start: usize,
    pub byte_end: usize,
    #[serde(serialize_with = "ser_round3")]
    pub attention: f64,
    pub highlighted: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ScoreResponse {
    #[serde(serialize_with = "ser_round3")]
    pub score_0_100: f64,
    pub tokens: Vec<TokenView>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CandidateView {
    pub replacement: String,
    pub source: CandidateSource,
    pub individual_score_0_100: f64,
    pub resulting_score_0_100: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct AlternativesResponse {
    pub span: Span,
    pub original_score_0_100: f64,
    pub candidates: Vec<CandidateView>,
}

impl ScoreResponse {
    pub fn new(doc: &Document, scored: ScoredText) -> Self {
        let tokens = doc
            .tokens()
            .iter()
            .zip(scored.attention.iter().zip(&scored.highlighted))
            .map(|(t, (&attention, &highlighted))| TokenView {
                text: t.text.clone(),
                byte_start: t.byte_start,
                byte_end: t.byte_end,
                attention,
                highlighted,
            })
            .collect();
        ScoreResponse {
            score_0_100: scored.toxicity * 100.0,
            tokens,
        }
    }
}

impl From<SuggestionSet> for AlternativesResponse {
    fn from(set: SuggestionSet) -> Self {
        AlternativesResponse {
            span: set.span,
            original_score_0_100: score_0_100(set.original_toxicity),
            candidates: set
                .candidates
                .into_iter()
                .map(|c| CandidateView {
                    replacement: c.replacement,
                    source: c.source,
                    individual_score_0_100: score_0_100(c.individual_toxicity),
                    resulting_score_0_100: score_0_100(c.resulting_toxicity),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SpanScoreResponse {
    pub score_0_100: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct HealthResponse {
    pub status: String,
    pub backend: String,
    pub vocab_sizes: BTreeMap<String, usize>,
}

fn context(state: &AppState) -> Result<(Arc<dyn ToxicityBackend>, Thresholds), ApiError> {
    Ok((
        state.backend().ok_or(ApiError::Loading)?,
        *state.thresholds(),
    ))
}

pub(crate) async fn score(State(state): State<AppState>, body: Bytes) -> ApiResult<ScoreResponse> {
    let req: TextRequest = parse_body(&body)?;
    check_text(&req.text)?;
    let (backend, thresholds) = context(&state)?;
    blocking(move || {
        let doc = tokenize(&req.text)?;
        let scored = annotate(&doc, backend.as_ref(), &thresholds)?;
        Ok(ScoreResponse::new(&doc, scored))
    })
    .await
    .map(Json)
}

pub(crate) async fn alternatives(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<AlternativesResponse> {
    let req: SpanRequest = parse_body(&body)?;
    check_text(&req.text)?;
    let (backend, thresholds) = context(&state)?;
    blocking(move || {
        let doc = tokenize(&req.text)?;
        let set = generate_span_alternatives(&doc, req.span, backend.as_ref(), &thresholds)?;
        Ok(set.into())
    })
    .await
    .map(Json)
}

pub(crate) async fn score_span_handler(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<SpanScoreResponse> {
    let req: SpanRequest = parse_body(&body)?;
    check_text(&req.text)?;
    let (backend, _) = context(&state)?;
    blocking(move || {
        let doc = tokenize(&req.text)?;
        let toxicity = score_span(&doc, req.span, backend.as_ref())?;
        Ok(SpanScoreResponse {
            score_0_100: score_0_100(toxicity),
        })
    })
    .await
    .map(Json)
}

pub(crate) async fn feedback(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let req: FeedbackRequest = parse_body(&body)?;
    check_text(&req.text)?;
    if req.comment.trim().is_empty() {
        return Err(ApiError::Unprocessable("comment must not be empty".into()));
    }
    if req.comment.len() > MAX_COMMENT_BYTES {
        return Err(ApiError::Unprocessable(format!(
            "comment is {} bytes, limit is {MAX_COMMENT_BYTES}",
            req.comment.len()
        )));
    }
    let (backend, _) = context(&state)?;
    let text = req.text;
    let (text, toxicity) = blocking(move || {
        let toxicity = backend.score(&text)?;
        Ok((text, toxicity))
    })
    .await?;
    let record = FeedbackRecord {
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        text,
        comment: req.comment,
        score_0_100: score_0_100(toxicity),
    };
    state.feedback().submit(&record).await?;
    Ok(Json(json!({ "accepted": true })))
}

pub(crate) async fn health(State(state): State<AppState>) -> Response {
    match state.backend() {
        Some(backend) => Json(HealthResponse {
            status: "ok".into(),
            backend: backend.name().to_string(),
            vocab_sizes: backend.vocab_sizes(),
        })
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "loading" })),
        )
            .into_response(),
    }
}
