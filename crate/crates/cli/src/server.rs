//! HTTP/JSON service over a loaded model set, embedding table and
//! trending-topics snapshot.
//!
//! Models and embeddings are fixed for the life of the process. The topics
//! snapshot is swapped whole on reload, so a request sees either the old
//! list or the new one.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{OwnedSemaphorePermit, Semaphore};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tubepulse_core::request::{FieldError, PredictRequest, RequestError, VideoRequest};
use tubepulse_core::trendrank::{load_topics, DEFAULT_BETA, DEFAULT_MAX_TOPICS};
use tubepulse_core::{EmbeddingTable, TrendingTopics};

use crate::service::{rank_prediction, ModelSet, PredictError, TrendContext};

pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_CONCURRENCY: usize = 64;
pub const DEFAULT_CORS_ORIGIN: &str = "http://localhost:5173";
const BODY_LIMIT: usize = 256 * 1024;

#[derive(Debug, Clone)]
pub struct ServerOptions {
    pub beta: f64,
    pub max_concurrency: usize,
    pub max_topics: usize,
    pub topics_path: Option<PathBuf>,
    pub token: Option<String>,
    pub admin_token: Option<String>,
    pub cors_origins: Vec<String>,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            beta: DEFAULT_BETA,
            max_concurrency: DEFAULT_MAX_CONCURRENCY,
            max_topics: DEFAULT_MAX_TOPICS,
            topics_path: None,
            token: None,
            admin_token: None,
            cors_origins: vec![DEFAULT_CORS_ORIGIN.to_string()],
        }
    }
}

pub struct AppState {
    models: ModelSet,
    embeddings: Option<EmbeddingTable>,
    topics: RwLock<Option<Arc<TrendingTopics>>>,
    options: ServerOptions,
    permits: Arc<Semaphore>,
}

impl AppState {
    pub fn new(
        models: ModelSet,
        embeddings: Option<EmbeddingTable>,
        topics: Option<TrendingTopics>,
        options: ServerOptions,
    ) -> Self {
        AppState {
            models,
            embeddings,
            topics: RwLock::new(topics.map(Arc::new)),
            permits: Arc::new(Semaphore::new(options.max_concurrency.max(1))),
            options,
        }
    }

    pub fn topics(&self) -> Option<Arc<TrendingTopics>> {
        self.topics.read().expect("topics lock").clone()
    }

    pub fn set_topics(&self, topics: TrendingTopics) {
        *self.topics.write().expect("topics lock") = Some(Arc::new(topics));
    }

    /// Re-reads the topics file. The current snapshot stays in place when
    /// reading fails.
    pub fn reload_topics(&self) -> Result<Arc<TrendingTopics>, String> {
        let path = self
            .options
            .topics_path
            .as_ref()
            .ok_or("server was started without a topics file")?;
        let fresh = load_topics(path, self.options.max_topics).map_err(|e| format!("{}: {e}", path.display()))?;
        let fresh = Arc::new(fresh);
        *self.topics.write().expect("topics lock") = Some(fresh.clone());
        Ok(fresh)
    }

    /// Takes a concurrency slot, or `None` when all are in use. Requests
    /// hold one for their whole lifetime.
    pub fn try_admit(&self) -> Option<OwnedSemaphorePermit> {
        self.permits.clone().try_acquire_owned().ok()
    }

    fn missing_components(&self) -> Vec<&'static str> {
        let mut missing = Vec::new();
        if self.models.is_empty() {
            missing.push("model");
        }
        if self.embeddings.is_none() {
            missing.push("embeddings");
        }
        if self.topics().is_none_or(|t| t.is_empty()) {
            missing.push("topics");
        }
        missing
    }
}

/// Error body: `{"error": {"code", "message", "fields"?}}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    fields: Option<Vec<FieldError>>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            fields: None,
        }
    }

    fn invalid(e: RequestError) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "invalid_request",
            message: e.to_string(),
            fields: Some(e.errors),
        }
    }

    fn unavailable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "component_unavailable", message)
    }

    fn internal() -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({"code": self.code, "message": self.message});
        if let Some(fields) = self.fields {
            error["fields"] = json!(fields);
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}

impl From<PredictError> for ApiError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::NoModel { .. } => ApiError::new(StatusCode::CONFLICT, "model_unavailable", e.to_string()),
            // Validation already rejects as_of < published_at, so this is
            // only reachable through a bug.
            PredictError::Feature(ref inner) => {
                log::error!("featurization failed after validation: {inner}");
                ApiError::internal()
            }
            PredictError::Model(inner) => {
                log::error!("prediction failed: {inner}");
                ApiError::internal()
            }
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_request(body: Result<Bytes, BytesRejection>) -> ApiResult<VideoRequest> {
    let body = body.map_err(|e| ApiError::new(e.status(), "bad_body", e.body_text()))?;
    let text = std::str::from_utf8(&body).map_err(|_| {
        ApiError::invalid(RequestError {
            errors: vec![FieldError {
                field: "body".into(),
                message: "body is not valid UTF-8".into(),
            }],
        })
    })?;
    let req = PredictRequest::from_json(text).map_err(ApiError::invalid)?;
    req.validate(None).map_err(ApiError::invalid)
}

async fn predict(
    State(state): State<Arc<AppState>>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let req = parse_request(body)?;
    let p = state.models.predict(&req)?;
    Ok(Json(json!(p)))
}

async fn rank(
    State(state): State<Arc<AppState>>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let req = parse_request(body)?;
    let prediction = state.models.predict(&req)?;
    let table = state
        .embeddings
        .as_ref()
        .ok_or_else(|| ApiError::unavailable("embeddings are not loaded"))?;
    let topics = state
        .topics()
        .ok_or_else(|| ApiError::unavailable("trending topics are not loaded"))?;
    if topics.is_empty() {
        return Err(ApiError::unavailable("trending topic list is empty"));
    }
    let ctx = TrendContext {
        table,
        topics: &topics,
        beta: state.options.beta,
    };
    let ranked = rank_prediction(&req, prediction, &ctx).map_err(|e| {
        log::error!("ranking failed: {e}");
        ApiError::internal()
    })?;
    Ok(Json(json!(ranked)))
}

#[derive(Serialize)]
struct TrendingBody<'a> {
    #[serde(flatten)]
    topics: &'a TrendingTopics,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<&'static str>,
}

async fn trending(State(state): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let topics = state
        .topics()
        .ok_or_else(|| ApiError::unavailable("trending topics are not loaded"))?;
    let body = TrendingBody {
        topics: &topics,
        warning: topics
            .is_empty()
            .then_some("trending topic list is empty; ranking is unavailable"),
    };
    Ok(Json(json!(body)))
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let missing = state.missing_components();
    let models: Vec<_> = state
        .models
        .iter()
        .map(|m| json!({"profile": m.profile.id(), "version": m.version()}))
        .collect();
    let primary = state
        .models
        .get(tubepulse_core::ProfileKind::PreUpload)
        .or_else(|| state.models.iter().next());
    let mut body = json!({
        "status": if missing.is_empty() { "ok" } else { "unavailable" },
        "models": models,
        "embeddings_loaded": state.embeddings.is_some(),
        "topics_count": state.topics().map_or(0, |t| t.len()),
        "missing": missing,
    });
    if let Some(m) = primary {
        body["model_version"] = json!(m.version());
    }
    let status = if missing.is_empty() {
        StatusCode::OK
    } else {
        StatusCode::SERVICE_UNAVAILABLE
    };
    (status, Json(body)).into_response()
}

async fn reload(State(state): State<Arc<AppState>>, req: Request) -> ApiResult<Json<serde_json::Value>> {
    let expected = state.options.admin_token.as_deref().unwrap_or_default();
    if !bearer_matches(&req, expected) {
        return Err(ApiError::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "admin token required",
        ));
    }
    let fresh = state.reload_topics().map_err(|e| {
        log::error!("topics reload failed: {e}");
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "reload_failed",
            "topics reload failed; previous list kept",
        )
    })?;
    log::info!("reloaded {} trending topics", fresh.len());
    Ok(Json(json!(*fresh)))
}

fn bearer_matches(req: &Request, token: &str) -> bool {
    req.headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|given| given == token)
}

async fn require_token(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    match &state.options.token {
        Some(token) if req.uri().path() != "/api/health" && !bearer_matches(&req, token) => ApiError::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing or wrong bearer token",
        )
        .into_response(),
        _ => next.run(req).await,
    }
}

async fn shed_load(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    match state.try_admit() {
        Some(_permit) => next.run(req).await,
        None => ApiError::new(
            StatusCode::TOO_MANY_REQUESTS,
            "overloaded",
            "too many concurrent requests",
        )
        .into_response(),
    }
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "method_not_allowed",
        "method not allowed",
    )
}

fn cors(origins: &[String]) -> Option<CorsLayer> {
    let values: Vec<HeaderValue> = origins
        .iter()
        .filter_map(|o| match HeaderValue::from_str(o) {
            Ok(v) => Some(v),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin {o:?}");
                None
            }
        })
        .collect();
    if values.is_empty() {
        return None;
    }
    Some(
        CorsLayer::new()
            .allow_origin(AllowOrigin::list(values))
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([header::CONTENT_TYPE, header::AUTHORIZATION]),
    )
}

pub fn router(state: Arc<AppState>) -> Router {
    let mut api = Router::new()
        .route("/api/predict", post(predict))
        .route("/api/rank", post(rank))
        .route("/api/trending", get(trending))
        .route("/api/health", get(health));
    if state.options.admin_token.is_some() {
        api = api.route("/api/admin/reload-topics", post(reload));
    }
    let mut app = api
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .layer(middleware::from_fn_with_state(state.clone(), shed_load))
        .layer(axum::extract::DefaultBodyLimit::max(BODY_LIMIT));
    if let Some(layer) = cors(&state.options.cors_origins) {
        app = app.layer(layer);
    }
    app.with_state(state)
}

/// Serves until Ctrl-C. On Unix, SIGHUP reloads the topics file.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut hup = signal(SignalKind::hangup())?;
        let st = state.clone();
        tokio::spawn(async move {
            while hup.recv().await.is_some() {
                match st.reload_topics() {
                    Ok(t) => log::info!("SIGHUP: reloaded {} trending topics", t.len()),
                    Err(e) => log::error!("SIGHUP: topics reload failed, keeping previous list: {e}"),
                }
            }
        });
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
