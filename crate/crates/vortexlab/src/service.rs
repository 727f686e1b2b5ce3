//! Read-only HTTP API over an export bundle.
//!
//! Cluster requests are computed per request on a bounded blocking pool and never touch
//! the bundle on disk.

use std::cmp::Ordering;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use vortex_core::clustering::ClusterRequest;
use vortex_core::geometry::SkeletonNode;
use vortex_core::profiling::Feature;
use vortex_core::Execution;

use crate::bundle::{Bundle, BundleError};
use crate::pipeline::run_cluster;

#[derive(Clone)]
pub struct AppState {
    pub bundle: Arc<Bundle>,
    pub workers: Arc<Semaphore>,
    pub exec: Execution,
}

impl AppState {
    pub fn new(bundle: Bundle, workers: usize, exec: Execution) -> Self {
        AppState { bundle: Arc::new(bundle), workers: Arc::new(Semaphore::new(workers.max(1))), exec }
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match &self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(ErrorBody { error: msg })).into_response()
    }
}

impl From<BundleError> for ApiError {
    fn from(e: BundleError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_id(raw: &str) -> ApiResult<usize> {
    raw.parse().map_err(|_| ApiError::BadRequest(format!("vortex id must be a non-negative integer, got `{raw}`")))
}

fn unknown(id: usize) -> ApiError {
    ApiError::NotFound(format!("no vortex with id {id}"))
}

async fn manifest(State(s): State<AppState>) -> Json<crate::bundle::Manifest> {
    Json(s.bundle.manifest.clone())
}

async fn tree(State(s): State<AppState>) -> Json<crate::bundle::TreeDoc> {
    Json(s.bundle.tree.clone())
}

async fn profiles(State(s): State<AppState>) -> Json<Vec<vortex_core::profiling::VortexProfile>> {
    Json(s.bundle.profiles.clone())
}

async fn mesh(State(s): State<AppState>, UrlPath(raw): UrlPath<String>) -> ApiResult<Response> {
    let id = parse_id(&raw)?;
    let bytes = s.bundle.mesh_bytes(id)?.ok_or_else(|| unknown(id))?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonDoc {
    pub id: usize,
    pub nodes: Vec<SkeletonNode>,
    pub edges: Vec<[usize; 2]>,
    /// Node indices of the main path, in order.
    pub main_path: Vec<usize>,
}

async fn skeleton(State(s): State<AppState>, UrlPath(raw): UrlPath<String>) -> ApiResult<Json<SkeletonDoc>> {
    let id = parse_id(&raw)?;
    let node = s.bundle.node(id).ok_or_else(|| unknown(id))?;
    if !node.is_leaf {
        return Err(ApiError::NotFound(format!("vortex {id} is not a leaf and has no skeleton")));
    }
    let sk = s.bundle.skeleton(id)?.ok_or_else(|| ApiError::NotFound(format!("no skeleton stored for vortex {id}")))?;
    Ok(Json(SkeletonDoc { id, nodes: sk.nodes, edges: sk.edges, main_path: sk.main_path }))
}

async fn candidates(State(s): State<AppState>) -> Json<Vec<vortex_core::hairpin::HairpinScores>> {
    Json(s.bundle.hairpin.iter().filter(|h| h.is_candidate).cloned().collect())
}

#[derive(Debug, Clone, Deserialize)]
pub struct SubtreeQuery {
    pub root: Option<String>,
    pub max_nodes: Option<String>,
    pub sort: Option<String>,
    pub min_size: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtreeNode {
    pub id: usize,
    /// Nearest ancestor that is also in the response; `None` only for the root.
    pub parent: Option<usize>,
    pub level: usize,
    pub size: usize,
    pub is_leaf: bool,
    /// Value of the sort feature; absent for internal nodes and skeleton features.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subtree {
    pub root: usize,
    pub sort: Feature,
    pub nodes: Vec<SubtreeNode>,
}

/// The sub-tree view query: the root plus at most `max_nodes` of its proper descendants with
/// at least `min_size` cells, the ones with the largest `sort` values first (ties by id).
/// Nodes without a value for the feature rank last.
pub fn subtree(bundle: &Bundle, root: usize, max_nodes: usize, sort: Feature, min_size: usize) -> Option<Subtree> {
    let root_node = bundle.node(root)?;
    let mut below = Vec::new();
    let mut stack: Vec<usize> = root_node.children.iter().rev().copied().collect();
    while let Some(id) = stack.pop() {
        let n = &bundle.tree.nodes[id];
        below.push(id);
        stack.extend(n.children.iter().rev());
    }
    let mut picked: Vec<(usize, Option<f64>)> = below
        .into_iter()
        .filter(|&id| bundle.tree.nodes[id].size >= min_size)
        .map(|id| (id, bundle.feature_value(id, sort)))
        .collect();
    picked.sort_by(|a, b| match (a.1, b.1) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.0.cmp(&b.0)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.0.cmp(&b.0),
    });
    picked.truncate(max_nodes);
    let chosen: std::collections::HashSet<usize> = picked.iter().map(|p| p.0).chain([root]).collect();
    let entry = |id: usize, value: Option<f64>| {
        let n = &bundle.tree.nodes[id];
        let mut parent = if id == root { None } else { n.parent };
        while let Some(p) = parent {
            if chosen.contains(&p) {
                break;
            }
            parent = bundle.tree.nodes[p].parent;
        }
        SubtreeNode { id, parent, level: n.level, size: n.size, is_leaf: n.is_leaf, value }
    };
    let mut nodes = vec![entry(root, bundle.feature_value(root, sort))];
    nodes.extend(picked.into_iter().map(|(id, v)| entry(id, v)));
    Some(Subtree { root, sort, nodes })
}

fn parse_opt<T: std::str::FromStr>(name: &str, raw: &Option<String>, default: T) -> ApiResult<T> {
    match raw {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| ApiError::BadRequest(format!("`{name}` must be a non-negative integer, got `{s}`"))),
    }
}

async fn subtree_handler(State(s): State<AppState>, Query(q): Query<SubtreeQuery>) -> ApiResult<Json<Subtree>> {
    let raw_root = q.root.as_deref().ok_or_else(|| ApiError::BadRequest("`root` is required".into()))?;
    let root = parse_id(raw_root)?;
    let max_nodes = parse_opt("max_nodes", &q.max_nodes, 20usize)?;
    let min_size = parse_opt("min_size", &q.min_size, 0usize)?;
    let sort = match &q.sort {
        None => Feature::Size,
        Some(name) => name.parse().map_err(|_| ApiError::BadRequest(format!("unknown sort feature `{name}`")))?,
    };
    subtree(&s.bundle, root, max_nodes, sort, min_size).map(Json).ok_or_else(|| unknown(root))
}

async fn cluster(State(s): State<AppState>, body: Bytes) -> ApiResult<Json<vortex_core::clustering::ClusterResult>> {
    let request: ClusterRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("malformed cluster request: {e}")))?;
    let _permit = s.workers.clone().acquire_owned().await.map_err(|e| ApiError::Internal(e.to_string()))?;
    let bundle = s.bundle.clone();
    let exec = s.exec;
    let result = tokio::task::spawn_blocking(move || run_cluster(&bundle.profiles, &bundle.hairpin, &request, exec))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    result.map(Json).map_err(|e| ApiError::BadRequest(e.to_string()))
}

async fn fallback() -> ApiError {
    ApiError::NotFound("no such endpoint".into())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/manifest", get(manifest))
        .route("/api/tree", get(tree))
        .route("/api/profiles", get(profiles))
        .route("/api/vortex/{id}/mesh", get(mesh))
        .route("/api/vortex/{id}/skeleton", get(skeleton))
        .route("/api/hairpin/candidates", get(candidates))
        .route("/api/subtree", get(subtree_handler))
        .route("/api/cluster", post(cluster))
        .fallback(fallback)
        .with_state(state)
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Loads the bundle and serves it until Ctrl-C.
pub async fn serve(bundle_dir: &Path, addr: SocketAddr, workers: usize, exec: Execution) -> Result<(), ServeError> {
    let bundle = Bundle::load(bundle_dir)?;
    let listener = TcpListener::bind(addr).await.map_err(|e| ServeError::Bind(addr, e))?;
    log::info!("serving {} on http://{}", bundle_dir.display(), listener.local_addr().map_err(ServeError::Io)?);
    serve_on(listener, AppState::new(bundle, workers, exec), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
    .map_err(ServeError::Io)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("cannot bind {0}: {1}")]
    Bind(SocketAddr, std::io::Error),
    #[error(transparent)]
    Io(std::io::Error),
}
