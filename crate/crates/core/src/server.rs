//! HTTP/JSON API over an immutable search snapshot.
//!
//! - `GET  /api/domains`      → `[{index, name}]`
//! - `POST /api/search`       → `{results: [...]}`
//! - `GET  /api/graph/stats`  → graph statistics
//! - `GET  /healthz`          → 200
//!
//! Anything else is served from the static UI directory.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::graph::GraphStats;
use crate::repository::Layout;
use crate::search::{IndexError, SearchError, SearchIndex, SearchRequest, SearchResponse};

/// Shared service state. Readers clone the current `Arc` and never observe a
/// half-built snapshot; reloads build off to the side and swap.
pub struct AppState {
    current: RwLock<Arc<SearchIndex>>,
}

impl AppState {
    pub fn new(index: SearchIndex) -> Arc<Self> {
        Arc::new(AppState {
            current: RwLock::new(Arc::new(index)),
        })
    }

    pub fn snapshot(&self) -> Arc<SearchIndex> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn swap(&self, index: SearchIndex) {
        *self.current.write().expect("snapshot lock") = Arc::new(index);
    }

    pub async fn reload(&self, layout: Layout) -> Result<(), IndexError> {
        let index = tokio::task::spawn_blocking(move || SearchIndex::load(&layout))
            .await
            .expect("reload task")?;
        self.swap(index);
        Ok(())
    }
}

#[derive(Serialize)]
struct DomainEntry {
    index: usize,
    name: String,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let status = match e {
            SearchError::EmptyQuery => StatusCode::UNPROCESSABLE_ENTITY,
            SearchError::NoDomainSelected | SearchError::UnknownDomain(_) | SearchError::InvalidLimit => {
                StatusCode::BAD_REQUEST
            }
        };
        ApiError(status, e.to_string())
    }
}

async fn domains(State(state): State<Arc<AppState>>) -> Json<Vec<DomainEntry>> {
    let snap = state.snapshot();
    Json(
        snap.domain_names()
            .iter()
            .enumerate()
            .map(|(index, name)| DomainEntry {
                index,
                name: name.clone(),
            })
            .collect(),
    )
}

async fn search(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SearchRequest>, JsonRejection>,
) -> Result<Json<SearchResponse>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))?;
    Ok(Json(state.snapshot().search(&req)?))
}

async fn graph_stats(State(state): State<Arc<AppState>>) -> Json<GraphStats> {
    Json(state.snapshot().graph().stats())
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/domains", get(domains))
        .route("/api/search", post(search))
        .route("/api/graph/stats", get(graph_stats))
        .route("/healthz", get(healthz))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
