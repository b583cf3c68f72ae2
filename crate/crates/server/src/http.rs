//! HTTP routes, auth and error mapping.
//!
//! | status | error code              | raised by                                              |
//! |--------|-------------------------|--------------------------------------------------------|
//! | 400    | `bad_request`           | bad query value, duplicate ids in one ingest, bad If-Match, unsupported export format |
//! | 400    | `unknown_engine`        | detect with a missing or unregistered engine (body lists `engines`) |
//! | 400    | `invalid_body`          | body is not valid JSON (415 if not `application/json`, 422 if the JSON has the wrong shape) |
//! | 401    | `unauthorized`          | auth enabled and the bearer token is missing or unknown |
//! | 403    | `forbidden`             | annotation `annotator_id` differs from the token's annotator |
//! | 404    | `not_found`             | unknown dataset, pair or route                          |
//! | 409    | `pair_conflict`         | ingest of an existing pair_id with different content (body lists `pair_ids`) |
//! | 409    | `version_conflict`      | If-Match version is stale (body carries `current_version`) |
//! | 422    | `invalid_pairs`         | ingest with an invalid pair; nothing is stored          |
//! | 422    | `invalid_annotation`    | annotation fails validation (body carries `violations`) |
//! | 428    | `precondition_required` | annotation PUT without If-Match                         |
//! | 502    | `engine_failure`        | detection engine unreachable, timed out, or answered badly |
//! | 500    | `internal`              | store or export failure                                 |

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::header::{AUTHORIZATION, CONTENT_DISPOSITION, CONTENT_TYPE, ETAG, IF_MATCH, WWW_AUTHENTICATE};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Extension, Json, Router};
use postedit_core::detection::DetectionError;
use postedit_core::PairStatus;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

use crate::service::{AnnotationInput, ExportFormat, PairInput, Service, ServiceError, DEFAULT_PAGE_SIZE};

/// Longest upstream body echoed back in an error response.
const MAX_ECHOED_BODY: usize = 2000;

pub struct AppState {
    pub service: Service,
    /// token → annotator_id; empty means auth is disabled.
    pub tokens: HashMap<String, String>,
}

/// Annotator bound to the request's bearer token, if auth is enabled.
#[derive(Debug, Clone)]
struct Caller(Option<String>);

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(MAX_ECHOED_BODY).collect()
}

fn error_body(status: StatusCode, code: &str, message: String, extra: Value) -> Response {
    let mut body = json!({"error": code, "message": message});
    if let (Value::Object(map), Value::Object(more)) = (&mut body, extra) {
        map.extend(more);
    }
    (status, Json(body)).into_response()
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let message = self.0.to_string();
        let (status, code, extra) = match self.0 {
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request", json!({})),
            ServiceError::UnknownEngine { requested, available } => {
                let message = match requested {
                    Some(r) => format!("unknown engine {r:?}; available: {}", available.join(", ")),
                    None => format!(
                        "engine query parameter is required; available: {}",
                        available.join(", ")
                    ),
                };
                return error_body(
                    StatusCode::BAD_REQUEST,
                    "unknown_engine",
                    message,
                    json!({"engines": available}),
                );
            }
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found", json!({})),
            ServiceError::PairConflict { pair_ids } => {
                (StatusCode::CONFLICT, "pair_conflict", json!({"pair_ids": pair_ids}))
            }
            ServiceError::VersionConflict { current_version, .. } => (
                StatusCode::CONFLICT,
                "version_conflict",
                json!({"current_version": current_version}),
            ),
            ServiceError::InvalidPairs { pairs } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_pairs",
                json!({"pairs": pairs}),
            ),
            ServiceError::InvalidAnnotation { violations } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_annotation",
                json!({"violations": violations}),
            ),
            ServiceError::PreconditionRequired => {
                (StatusCode::PRECONDITION_REQUIRED, "precondition_required", json!({}))
            }
            ServiceError::Unauthorized => {
                let mut r = error_body(StatusCode::UNAUTHORIZED, "unauthorized", message, json!({}));
                r.headers_mut()
                    .insert(WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
                return r;
            }
            ServiceError::Forbidden(_) => (StatusCode::FORBIDDEN, "forbidden", json!({})),
            ServiceError::Engine(e) => {
                let extra = match &e {
                    DetectionError::Unavailable { engine, attempts, .. } => {
                        json!({"engine": engine, "attempts": attempts})
                    }
                    DetectionError::Upstream { engine, status, body } => {
                        json!({"engine": engine, "upstream_status": status, "upstream_body": truncate(body)})
                    }
                    DetectionError::Format {
                        engine,
                        error,
                        raw_body,
                    } => {
                        json!({"engine": engine, "format_error": error.to_string(), "upstream_body": truncate(raw_body)})
                    }
                    _ => json!({}),
                };
                (StatusCode::BAD_GATEWAY, "engine_failure", extra)
            }
            ServiceError::Store(_) | ServiceError::Export(_) => {
                tracing::error!(error = %message, "internal failure");
                (StatusCode::INTERNAL_SERVER_ERROR, "internal", json!({}))
            }
        };
        error_body(status, code, message, extra)
    }
}

fn body_error(rejection: JsonRejection) -> Response {
    error_body(rejection.status(), "invalid_body", rejection.body_text(), json!({}))
}

fn query_error(rejection: QueryRejection) -> Response {
    error_body(StatusCode::BAD_REQUEST, "bad_request", rejection.body_text(), json!({}))
}

fn bad_request(message: String) -> Response {
    ApiError(ServiceError::BadRequest(message)).into_response()
}

/// Treats `?key=` like an absent key.
fn present(value: &Option<String>) -> Option<&str> {
    value.as_deref().map(str::trim).filter(|v| !v.is_empty())
}

fn parse_number(name: &str, value: &Option<String>, default: usize) -> Result<usize, String> {
    match present(value) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| format!("{name} must be a non-negative integer, got {v:?}")),
    }
}

fn parse_flag(name: &str, value: &Option<String>) -> Result<bool, String> {
    match present(value) {
        None | Some("false" | "0") => Ok(false),
        Some("true" | "1") => Ok(true),
        Some(v) => Err(format!("{name} must be true or false, got {v:?}")),
    }
}

fn etag(version: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{version}\"")).expect("digits are a valid header value")
}

/// Accepts `3`, `"3"` and `W/"3"`.
fn parse_if_match(headers: &HeaderMap) -> Result<u64, ServiceError> {
    let raw = headers.get(IF_MATCH).ok_or(ServiceError::PreconditionRequired)?;
    let text = raw.to_str().unwrap_or("").trim();
    let text = text.strip_prefix("W/").unwrap_or(text);
    let text = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(text);
    text.parse()
        .map_err(|_| ServiceError::BadRequest(format!("If-Match must carry an annotation version, got {text:?}")))
}

async fn authenticate(State(app): State<Arc<AppState>>, mut request: Request, next: Next) -> Response {
    let caller = if app.tokens.is_empty() {
        Caller(None)
    } else {
        let token = request
            .headers()
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim);
        match token.and_then(|t| app.tokens.get(t)) {
            Some(annotator) => Caller(Some(annotator.clone())),
            None => return ApiError(ServiceError::Unauthorized).into_response(),
        }
    };
    request.extensions_mut().insert(caller);
    next.run(request).await
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IngestBody {
    Wrapped { pairs: Vec<PairInput> },
    Bare(Vec<PairInput>),
}

async fn ingest(
    State(app): State<Arc<AppState>>,
    Path(dataset_id): Path<String>,
    body: Result<Json<IngestBody>, JsonRejection>,
) -> Response {
    let pairs = match body {
        Ok(Json(IngestBody::Wrapped { pairs } | IngestBody::Bare(pairs))) => pairs,
        Err(e) => return body_error(e),
    };
    match app.service.ingest_pairs(&dataset_id, pairs) {
        Ok(outcome) => Json(outcome).into_response(),
        Err(e) => ApiError(e).into_response(),
    }
}

#[derive(Deserialize)]
struct ListQuery {
    status: Option<String>,
    page: Option<String>,
    page_size: Option<String>,
}

async fn list(
    State(app): State<Arc<AppState>>,
    Path(dataset_id): Path<String>,
    query: Result<Query<ListQuery>, QueryRejection>,
) -> Response {
    let Query(q) = match query {
        Ok(q) => q,
        Err(e) => return query_error(e),
    };
    let status = match present(&q.status).map(str::parse::<PairStatus>).transpose() {
        Ok(s) => s,
        Err(e) => return bad_request(format!("{e}; use pending, in_progress or completed")),
    };
    let numbers = parse_number("page", &q.page, 1)
        .and_then(|page| Ok((page, parse_number("page_size", &q.page_size, DEFAULT_PAGE_SIZE)?)));
    let (page, page_size) = match numbers {
        Ok(v) => v,
        Err(message) => return bad_request(message),
    };
    match app.service.list_pairs(&dataset_id, status, page, page_size) {
        Ok(page) => Json(page).into_response(),
        Err(e) => ApiError(e).into_response(),
    }
}

async fn get_pair(State(app): State<Arc<AppState>>, Path(pair_id): Path<String>) -> Response {
    match app.service.get_pair(&pair_id) {
        Ok(view) => {
            let version = view.annotation.as_ref().map_or(0, |a| a.version);
            ([(ETAG, etag(version))], Json(view)).into_response()
        }
        Err(e) => ApiError(e).into_response(),
    }
}

#[derive(Deserialize)]
struct DetectQuery {
    engine: Option<String>,
    force: Option<String>,
}

async fn detect(
    State(app): State<Arc<AppState>>,
    Path(pair_id): Path<String>,
    query: Result<Query<DetectQuery>, QueryRejection>,
) -> Response {
    let Query(q) = match query {
        Ok(q) => q,
        Err(e) => return query_error(e),
    };
    let force = match parse_flag("force", &q.force) {
        Ok(f) => f,
        Err(message) => return bad_request(message),
    };
    match app.service.run_detection(&pair_id, present(&q.engine), force).await {
        Ok(view) => Json(view).into_response(),
        Err(e) => ApiError(e).into_response(),
    }
}

async fn put_annotation(
    State(app): State<Arc<AppState>>,
    Extension(Caller(caller)): Extension<Caller>,
    Path(pair_id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<AnnotationInput>, JsonRejection>,
) -> Response {
    if let Err(e) = app.service.get_pair(&pair_id) {
        return ApiError(e).into_response();
    }
    let expected = match parse_if_match(&headers) {
        Ok(v) => v,
        Err(e) => return ApiError(e).into_response(),
    };
    let input = match body {
        Ok(Json(input)) => input,
        Err(e) => return body_error(e),
    };
    match app
        .service
        .submit_annotation(&pair_id, input, expected, caller.as_deref())
    {
        Ok(outcome) => ([(ETAG, etag(outcome.version))], Json(outcome)).into_response(),
        Err(e) => ApiError(e).into_response(),
    }
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(app): State<Arc<AppState>>,
    Path(dataset_id): Path<String>,
    query: Result<Query<ExportQuery>, QueryRejection>,
) -> Response {
    let Query(q) = match query {
        Ok(q) => q,
        Err(e) => return query_error(e),
    };
    let format = match ExportFormat::parse(present(&q.format).unwrap_or("json")) {
        Ok(f) => f,
        Err(e) => return ApiError(e).into_response(),
    };
    match app.service.export_dataset(&dataset_id, format) {
        Ok(document) => {
            let stem: String = dataset_id
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            let disposition = format!("attachment; filename=\"{stem}.{}\"", format.extension());
            (
                [
                    (CONTENT_TYPE, HeaderValue::from_static(format.content_type())),
                    (
                        CONTENT_DISPOSITION,
                        HeaderValue::from_str(&disposition).expect("sanitized filename"),
                    ),
                ],
                document,
            )
                .into_response()
        }
        Err(e) => ApiError(e).into_response(),
    }
}

async fn not_found() -> Response {
    ApiError(ServiceError::NotFound("no such route".into())).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/datasets/{dataset_id}/pairs", post(ingest).get(list))
        .route("/datasets/{dataset_id}/export", get(export))
        .route("/pairs/{pair_id}", get(get_pair))
        .route("/pairs/{pair_id}/detect", post(detect))
        .route("/pairs/{pair_id}/annotation", put(put_annotation))
        .route_layer(middleware::from_fn_with_state(state.clone(), authenticate));
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods(Any)
        .allow_headers(Any)
        .expose_headers([ETAG]);
    Router::new()
        .route("/health", get(health))
        .merge(api)
        .fallback(not_found)
        .layer(cors)
        .with_state(state)
}
