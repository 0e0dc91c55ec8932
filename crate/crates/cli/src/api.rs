//! JSON API consumed by the web UI.
//!
//! `POST /api/check` runs the pipeline and caches the result under a
//! `claim_id`; `GET /api/document/{doc_id}` serves one document's rationales,
//! profile and word clouds from that cache (or recomputes them when given
//! the claim text).

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, HeaderName, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use factcheck_core::pipeline::{
    ChannelFlags, ChannelStatus, DocumentResult, FactCheckResult, LabelMode, Pipeline, PipelineConfig, PipelineError,
    VerdictBasis,
};
use factcheck_core::retrieval::{RetrievalModel, ScoredDocument};
use factcheck_core::sources::{fnv1a, Reliability};
use factcheck_core::stance::{sort_rationales, StanceLabel};
use lru::LruCache;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::{ServeDir, ServeFile};

pub const REQUEST_ID_HEADER: &str = "x-request-id";
pub const DEFAULT_CACHE_SIZE: usize = 256;

/// Per-request overrides of the service's pipeline config.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    pub claim: String,
    #[serde(default)]
    pub request_id: Option<String>,
    #[serde(default)]
    pub k: Option<usize>,
    /// Model name as accepted by the CLI, e.g. `dfr_z` or `bm25:1.2,0.75`.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub label_mode: Option<LabelMode>,
    #[serde(default)]
    pub channels: Option<Vec<Reliability>>,
    #[serde(default)]
    pub nei_threshold: Option<f64>,
    #[serde(default)]
    pub basis: Option<VerdictBasis>,
    #[serde(default)]
    pub rerank: Option<bool>,
}

impl CheckRequest {
    pub fn apply(&self, base: &PipelineConfig) -> Result<PipelineConfig, String> {
        let mut cfg = base.clone();
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(m) = &self.model {
            cfg.model = m.parse::<RetrievalModel>().map_err(|e| e.to_string())?;
        }
        if let Some(l) = self.label_mode {
            cfg.label_mode = l;
        }
        if let Some(c) = &self.channels {
            cfg.channels = ChannelFlags::only(c);
        }
        if let Some(t) = self.nei_threshold {
            cfg.nei_threshold = t;
        }
        if let Some(b) = self.basis {
            cfg.basis = b;
        }
        if let Some(r) = self.rerank {
            cfg.rerank = r;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResponse {
    pub request_id: String,
    pub claim_id: String,
    #[serde(flatten)]
    pub result: FactCheckResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentResponse {
    pub claim_id: String,
    pub claim: String,
    /// The channel the document was retrieved on, if it was retrieved.
    pub channel: Option<Reliability>,
    /// `document.rank` is 0 when the document was not retrieved.
    #[serde(flatten)]
    pub document: DocumentResult,
}

#[derive(Debug, Deserialize)]
pub struct DocumentParams {
    pub claim_id: Option<String>,
    pub claim: Option<String>,
    pub sort: Option<String>,
}

/// Stable id of a (claim, config) pair.
pub fn claim_id(claim: &str, config: &PipelineConfig) -> String {
    let key = format!("{}\n{}", claim.trim(), config.to_toml());
    format!("{:016x}", fnv1a(key.as_bytes(), 0))
}

struct Cached {
    claim: String,
    result: FactCheckResult,
}

pub struct AppState {
    pipeline: Result<Arc<Pipeline>, String>,
    cache: Mutex<LruCache<String, Arc<Cached>>>,
    requests: AtomicU64,
}

impl AppState {
    pub fn new(pipeline: Pipeline, cache_size: usize) -> Self {
        Self::with(Ok(Arc::new(pipeline)), cache_size)
    }

    /// A service whose artifacts failed to load; check requests get 503.
    pub fn unavailable(reason: impl Into<String>) -> Self {
        Self::with(Err(reason.into()), 1)
    }

    fn with(pipeline: Result<Arc<Pipeline>, String>, cache_size: usize) -> Self {
        let cap = NonZeroUsize::new(cache_size.max(1)).expect("non-zero");
        AppState {
            pipeline,
            cache: Mutex::new(LruCache::new(cap)),
            requests: AtomicU64::new(0),
        }
    }

    fn pipeline(&self) -> Result<Arc<Pipeline>, ApiError> {
        self.pipeline
            .clone()
            .map_err(|e| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, format!("artifacts not loaded: {e}")))
    }

    fn next_request_id(&self) -> String {
        format!("req-{:06}", self.requests.fetch_add(1, Ordering::Relaxed) + 1)
    }

    fn cached(&self, id: &str) -> Option<Arc<Cached>> {
        self.cache.lock().expect("cache lock").get(id).cloned()
    }

    fn store(&self, id: String, entry: Cached) -> Arc<Cached> {
        let entry = Arc::new(entry);
        self.cache.lock().expect("cache lock").put(id, entry.clone());
        entry
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    request_id: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            request_id: None,
        }
    }

    fn with_request(mut self, id: &str) -> Self {
        self.request_id = Some(id.to_string());
        self
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match e {
            PipelineError::EmptyClaim | PipelineError::Config(_) => StatusCode::BAD_REQUEST,
            PipelineError::AllChannelsFailed(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = match &self.request_id {
            Some(id) => json!({ "error": self.message, "request_id": id }),
            None => json!({ "error": self.message }),
        };
        let mut resp = (self.status, Json(body)).into_response();
        if let Some(v) = self.request_id.and_then(|id| HeaderValue::from_str(&id).ok()) {
            resp.headers_mut().insert(REQUEST_ID_HEADER, v);
        }
        resp
    }
}

async fn run_check(pipeline: Arc<Pipeline>, claim: String, config: PipelineConfig) -> Result<FactCheckResult, ApiError> {
    tokio::task::spawn_blocking(move || pipeline.check_claim_with(&claim, &config))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

/// Every enabled external channel failed while the Wikipedia channel
/// answered.
fn external_channels_failed(result: &FactCheckResult) -> bool {
    let external: Vec<_> = result.channels.iter().filter(|c| c.channel != Reliability::Wikipedia).collect();
    !external.is_empty()
        && external.iter().all(|c| c.status == ChannelStatus::Failed)
        && result
            .channel(Reliability::Wikipedia)
            .is_some_and(|c| c.status == ChannelStatus::Ok)
}

async fn check(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let header_id = headers
        .get(REQUEST_ID_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    let req: CheckRequest = serde_json::from_slice(&body).map_err(|e| {
        let id = header_id.clone().unwrap_or_else(|| state.next_request_id());
        ApiError::new(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")).with_request(&id)
    })?;
    let request_id = req
        .request_id
        .clone()
        .or(header_id)
        .unwrap_or_else(|| state.next_request_id());
    let fail = |e: ApiError| e.with_request(&request_id);
    if req.claim.trim().is_empty() {
        return Err(fail(ApiError::new(StatusCode::BAD_REQUEST, "claim is empty")));
    }
    let pipeline = state.pipeline().map_err(fail)?;
    let config = req
        .apply(&pipeline.config)
        .map_err(|e| fail(ApiError::new(StatusCode::BAD_REQUEST, e)))?;
    let claim = req.claim.trim().to_string();
    let id = claim_id(&claim, &config);
    let result = run_check(pipeline, claim.clone(), config).await.map_err(fail)?;
    let status = if external_channels_failed(&result) {
        StatusCode::BAD_GATEWAY
    } else {
        StatusCode::OK
    };
    state.store(
        id.clone(),
        Cached {
            claim,
            result: result.clone(),
        },
    );
    let mut resp = (
        status,
        Json(CheckResponse {
            request_id: request_id.clone(),
            claim_id: id,
            result,
        }),
    )
        .into_response();
    if let Ok(v) = HeaderValue::from_str(&request_id) {
        resp.headers_mut().insert(REQUEST_ID_HEADER, v);
    }
    Ok(resp)
}

async fn document(
    State(state): State<Arc<AppState>>,
    Path(doc_id): Path<String>,
    Query(params): Query<DocumentParams>,
) -> Result<Json<DocumentResponse>, ApiError> {
    let sort = params
        .sort
        .as_deref()
        .map(|s| s.parse::<StanceLabel>().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e)))
        .transpose()?;
    let pipeline = state.pipeline()?;
    let (id, entry) = match (&params.claim_id, &params.claim) {
        (Some(id), claim) => match (state.cached(id), claim) {
            (Some(e), _) => (id.clone(), e),
            (None, Some(claim)) => recompute(&state, &pipeline, claim).await?,
            (None, None) => {
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    format!("unknown claim_id {id:?}; pass claim= to recompute"),
                ))
            }
        },
        (None, Some(claim)) => recompute(&state, &pipeline, claim).await?,
        (None, None) => return Err(ApiError::new(StatusCode::BAD_REQUEST, "claim_id or claim is required")),
    };

    let retrieved = entry.result.channels.iter().find_map(|c| {
        c.documents
            .iter()
            .find(|d| d.doc_id == doc_id)
            .map(|d| (c.channel, d.clone()))
    });
    let (channel, mut doc) = match retrieved {
        Some((c, d)) => (Some(c), d),
        None => {
            let Some(record) = pipeline.index().document(&doc_id).cloned() else {
                return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown doc_id {doc_id:?}")));
            };
            let score = pipeline
                .index()
                .score(&pipeline.config.model, &entry.result.query.terms, &doc_id)
                .unwrap_or(0.0);
            let hit = ScoredDocument {
                doc_id: doc_id.clone(),
                score_init: score,
                rank: 0,
                f_rank: None,
            };
            let claim = entry.claim.clone();
            let p = pipeline.clone();
            let doc = tokio::task::spawn_blocking(move || p.analyze_document(&claim, &record, &hit, &p.config))
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
            (None, doc)
        }
    };
    if let Some(label) = sort {
        doc.rationales = sort_rationales(std::mem::take(&mut doc.rationales), label);
    }
    Ok(Json(DocumentResponse {
        claim_id: id,
        claim: entry.claim.clone(),
        channel,
        document: doc,
    }))
}

async fn recompute(state: &AppState, pipeline: &Arc<Pipeline>, claim: &str) -> Result<(String, Arc<Cached>), ApiError> {
    let claim = claim.trim().to_string();
    if claim.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "claim is empty"));
    }
    let config = pipeline.config.clone();
    let id = claim_id(&claim, &config);
    if let Some(e) = state.cached(&id) {
        return Ok((id, e));
    }
    let result = run_check(pipeline.clone(), claim.clone(), config).await?;
    let entry = state.store(id.clone(), Cached { claim, result });
    Ok((id, entry))
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    match &state.pipeline {
        Ok(p) => Json(json!({ "status": "ok", "documents": p.index().len() })).into_response(),
        Err(e) => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "unavailable", "error": e })),
        )
            .into_response(),
    }
}

async fn config(State(state): State<Arc<AppState>>) -> Result<Json<serde_json::Value>, ApiError> {
    let p = state.pipeline()?;
    let models: Vec<String> = RetrievalModel::all_variants().iter().map(|m| m.name()).collect();
    Ok(Json(json!({ "config": p.config, "models": models })))
}

#[derive(Debug, Clone, Default)]
pub struct ServerOptions {
    /// Allowed browser origins; `*` allows any.
    pub cors_origins: Vec<String>,
    /// Static UI bundle served at `/`.
    pub static_dir: Option<PathBuf>,
}

pub fn router(state: Arc<AppState>, options: &ServerOptions) -> Router {
    let api = Router::new()
        .route("/api/check", post(check))
        .route("/api/document/{doc_id}", get(document))
        .route("/api/health", get(health))
        .route("/api/config", get(config))
        .with_state(state);
    let api = if options.cors_origins.is_empty() {
        api
    } else {
        let origins = if options.cors_origins.iter().any(|o| o == "*") {
            AllowOrigin::any()
        } else {
            AllowOrigin::list(options.cors_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
        };
        api.layer(
            CorsLayer::new()
                .allow_origin(origins)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([axum::http::header::CONTENT_TYPE, HeaderName::from_static(REQUEST_ID_HEADER)])
                .expose_headers([HeaderName::from_static(REQUEST_ID_HEADER)]),
        )
    };
    match &options.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html")))),
        None => api,
    }
}
