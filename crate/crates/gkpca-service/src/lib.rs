//! HTTP JSON API over fitted models, for the latent-space explorer.
//!
//! | method | path                      | body / query                          |
//! |--------|---------------------------|---------------------------------------|
//! | POST   | `/models`                 | run config, or `{"model_path": ...}`  |
//! | GET    | `/models/{id}`            |                                       |
//! | GET    | `/models/{id}/latent`     | `?cx=1&cy=2` (components from 1)      |
//! | POST   | `/models/{id}/generate`   | `{"h_star": [...], "S": 15}`          |
//! | POST   | `/models/{id}/traverse`   | `{"path": {...}, "steps": 7, "S": 1}` |
//!
//! Errors come back as `{"error": {"category": ..., "message": ...}}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gkpca::novelty::DEFAULT_QUANTILE;
use gkpca::{
    archive, novelty_report_training, preimage, traverse, DataKind, GeneratedSample, KpcaModel,
    LatentRef, Neighbor, NoveltyReport, PathSpec, RunConfig,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

pub const DEFAULT_PORT: u16 = 8642;

/// A registered model. Never mutated after registration apart from the
/// lazily computed novelty overlay.
pub struct Entry {
    model: KpcaModel,
    novelty: OnceLock<NoveltyReport>,
}

impl Entry {
    fn novelty(&self) -> &NoveltyReport {
        self.novelty.get_or_init(|| {
            novelty_report_training(&self.model, DEFAULT_QUANTILE).expect("default quantile is valid")
        })
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    inner: Arc<Registry>,
}

#[derive(Default)]
struct Registry {
    models: RwLock<HashMap<String, Arc<Entry>>>,
    next: AtomicU64,
    data_root: Option<PathBuf>,
}

impl AppState {
    /// `data_root` is where relative dataset and model paths resolve.
    pub fn new(data_root: Option<PathBuf>) -> Self {
        Self {
            inner: Arc::new(Registry {
                data_root,
                ..Registry::default()
            }),
        }
    }

    /// Registers a model and returns its id.
    pub fn insert(&self, model: KpcaModel) -> String {
        let id = format!("m{}", self.inner.next.fetch_add(1, Ordering::Relaxed) + 1);
        let entry = Arc::new(Entry {
            model,
            novelty: OnceLock::new(),
        });
        self.inner
            .models
            .write()
            .expect("registry lock poisoned")
            .insert(id.clone(), entry);
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        self.inner
            .models
            .read()
            .expect("registry lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no model {id:?}")))
    }
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/models", post(create_model))
        .route("/models/{id}", get(model_info))
        .route("/models/{id}/latent", get(latent))
        .route("/models/{id}/generate", post(generate))
        .route("/models/{id}/traverse", post(traverse_path))
        .layer(cors)
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    category: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, category: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            category,
            message: message.into(),
        }
    }

    /// Bad requests are the caller's fault; anything else failed while fitting.
    fn from_fit(e: gkpca::Error) -> Self {
        let status = match e {
            gkpca::Error::Input(_) | gkpca::Error::Io(_) | gkpca::Error::Index { .. } => {
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.category(), e.to_string())
    }

    fn from_decode(e: gkpca::Error) -> Self {
        let status = match e.category() {
            "degenerate" => StatusCode::CONFLICT,
            "numeric" => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.category(), e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    category: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                category: self.category,
                message: &self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "input", format!("bad request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

#[derive(Serialize)]
struct ModelInfo {
    id: String,
    n: usize,
    d: usize,
    input_dim: usize,
    eigenvalues: Vec<f64>,
    render_hint: DataKind,
}

fn info(id: String, m: &KpcaModel) -> ModelInfo {
    ModelInfo {
        id,
        n: m.n(),
        d: m.d(),
        input_dim: m.input_dim(),
        eigenvalues: m.eigenvalues().to_vec(),
        render_hint: m.kind(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadRequest {
    model_path: PathBuf,
}

async fn create_model(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let value: serde_json::Value = parse_body(&body)?;
    let root = state.inner.data_root.clone();
    let model = if value.get("model_path").is_some() {
        let req: LoadRequest = parse_body(&body)?;
        let path = match &root {
            Some(r) if req.model_path.is_relative() => r.join(&req.model_path),
            _ => req.model_path,
        };
        blocking(move || archive::load(path)).await?
    } else {
        let cfg: RunConfig = parse_body(&body)?;
        blocking(move || cfg.run(root.as_deref())).await?
    }
    .map_err(ApiError::from_fit)?;
    let body = info(String::new(), &model);
    let id = state.insert(model);
    Ok((StatusCode::CREATED, Json(ModelInfo { id, ..body })).into_response())
}

async fn model_info(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ModelInfo>, ApiError> {
    let entry = state.get(&id)?;
    Ok(Json(info(id, &entry.model)))
}

#[derive(Deserialize)]
struct LatentQuery {
    cx: Option<usize>,
    cy: Option<usize>,
}

#[derive(Serialize)]
struct LatentPointOut {
    i: usize,
    x: f64,
    y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<i64>,
    novelty_score: f64,
    flagged: bool,
}

#[derive(Serialize)]
struct LatentView {
    cx: usize,
    cy: usize,
    novelty_threshold: f64,
    points: Vec<LatentPointOut>,
}

async fn latent(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<LatentQuery>, QueryRejection>,
) -> Result<Json<LatentView>, ApiError> {
    let entry = state.get(&id)?;
    let Query(q) = query.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "input", e.body_text()))?;
    let d = entry.model.d();
    let cx = q.cx.unwrap_or(1);
    let cy = q.cy.unwrap_or(2.min(d));
    for c in [cx, cy] {
        if c == 0 || c > d {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "input",
                format!("component {c} outside 1..={d}"),
            ));
        }
    }
    let view = blocking(move || {
        let m = &entry.model;
        let nov = entry.novelty();
        let h = m.hidden_units();
        let points = (0..m.n())
            .map(|i| LatentPointOut {
                i,
                x: h[(cx - 1, i)],
                y: h[(cy - 1, i)],
                label: m.labels().map(|l| l[i]),
                novelty_score: nov.scores[i],
                flagged: nov.flags[i],
            })
            .collect();
        LatentView {
            cx,
            cy,
            novelty_threshold: nov.threshold,
            points,
        }
    })
    .await?;
    Ok(Json(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    h_star: LatentRef,
    #[serde(rename = "S")]
    s: usize,
}

#[derive(Serialize)]
struct GenerateResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
    h_star: Vec<f64>,
    x_hat: Vec<f64>,
    neighbors: Vec<Neighbor>,
    render_hint: DataKind,
}

fn sample_out(g: GeneratedSample, step: Option<usize>, kind: DataKind) -> GenerateResponse {
    GenerateResponse {
        step,
        h_star: g.h_star.coords,
        x_hat: g.x_hat,
        neighbors: g.neighbors,
        render_hint: kind,
    }
}

async fn generate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<GenerateResponse>, ApiError> {
    let entry = state.get(&id)?;
    let req: GenerateRequest = parse_body(&body)?;
    let m = &entry.model;
    let h = req.h_star.resolve(m).map_err(ApiError::from_decode)?;
    let g = preimage(m, &h, req.s).map_err(ApiError::from_decode)?;
    Ok(Json(sample_out(g, None, m.kind())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TraverseRequest {
    path: PathSpec,
    steps: usize,
    #[serde(rename = "S")]
    s: usize,
}

#[derive(Serialize)]
struct TraverseResponse {
    samples: Vec<GenerateResponse>,
}

async fn traverse_path(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TraverseResponse>, ApiError> {
    let entry = state.get(&id)?;
    let req: TraverseRequest = parse_body(&body)?;
    let samples = blocking(move || {
        let m = &entry.model;
        let path = req.path.resolve(m, req.steps)?;
        let kind = m.kind();
        traverse(m, &path, req.s).map(|out| {
            out.into_iter()
                .enumerate()
                .map(|(k, g)| sample_out(g, Some(k), kind))
                .collect()
        })
    })
    .await?
    .map_err(ApiError::from_decode)?;
    Ok(Json(TraverseResponse { samples }))
}
