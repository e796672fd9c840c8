//! The JSON HTTP service.
//!
//! Reads work on an immutable snapshot of the store. Mutations queue on one
//! writer lock, apply to a copy, save it, and only then publish the copy,
//! so a success response means the change is on disk.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use tokio::net::TcpListener;

use codemapper::harvester::{import_candidate, Harvester, SnippetCandidate};
use codemapper::pdg::DEFAULT_ROUNDS;
use codemapper::store::{load_store, save_store, Concept, ConceptId, Store};
use codemapper::synthesis::Backend;

use crate::engine::{self, DEFAULT_PROVIDER};
use crate::error::ApiError;

pub struct AppState {
    path: PathBuf,
    store: RwLock<Arc<Store>>,
    writer: tokio::sync::Mutex<()>,
    harvester: Arc<Harvester>,
}

impl AppState {
    pub fn open(path: impl Into<PathBuf>, harvester: Harvester) -> Result<Self, ApiError> {
        let path = path.into();
        let store = load_store(&path)?;
        Ok(AppState {
            path,
            store: RwLock::new(Arc::new(store)),
            writer: tokio::sync::Mutex::new(()),
            harvester: Arc::new(harvester),
        })
    }

    pub fn snapshot(&self) -> Arc<Store> {
        self.store.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    /// Applies `change` to a copy of the store, saves it and publishes it.
    async fn mutate<T, F>(&self, change: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Store) -> Result<T, ApiError> + Send + 'static,
    {
        let _turn = self.writer.lock().await;
        let mut next = (*self.snapshot()).clone();
        let path = self.path.clone();
        let (next, out) = blocking(move || {
            let out = change(&mut next)?;
            save_store(&next, &path)?;
            Ok((next, out))
        })
        .await?;
        *self.store.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(next);
        Ok(out)
    }
}

async fn blocking<T, F>(work: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(work)
        .await
        .unwrap_or_else(|e| std::panic::resume_unwind(e.into_panic()))
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        json_response(status, self.to_json())
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn ok(body: String) -> Response {
    json_response(StatusCode::OK, body)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("request body: {e}")))
}

type Reply = Result<Response, ApiError>;
type Shared = State<Arc<AppState>>;

async fn list_concepts(State(app): Shared, Query(q): Query<HashMap<String, String>>) -> Reply {
    let store = app.snapshot();
    Ok(match q.get("q").map(|s| s.trim()).filter(|s| !s.is_empty()) {
        Some(query) => ok(engine::to_json(&engine::search(&store, query))),
        None => ok(engine::to_json(&store.concepts().collect::<Vec<_>>())),
    })
}

async fn add_concept(State(app): Shared, body: Bytes) -> Reply {
    let concept: Concept = parse_body(&body)?;
    let id = concept.id.clone();
    let stored = app
        .mutate(move |store| {
            store.add_concept(concept)?;
            Ok(store.get(&id).cloned().expect("just added"))
        })
        .await?;
    Ok(json_response(StatusCode::CREATED, engine::to_json(&stored)))
}

async fn hierarchy(State(app): Shared) -> Reply {
    Ok(ok(engine::to_json(&engine::hierarchy(&app.snapshot()))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkRequest {
    child: ConceptId,
    parent: ConceptId,
}

async fn link(State(app): Shared, body: Bytes) -> Reply {
    let req: LinkRequest = parse_body(&body)?;
    let echo = serde_json::json!({ "child": req.child, "parent": req.parent });
    app.mutate(move |store| Ok(store.link_specialization(&req.child, &req.parent)?))
        .await?;
    Ok(json_response(StatusCode::CREATED, engine::to_json(&echo)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    graph: serde_json::Value,
    #[serde(default = "default_backend")]
    backend: String,
}

fn default_backend() -> String {
    Backend::Minilang.as_str().to_string()
}

async fn generate(State(app): Shared, body: Bytes) -> Reply {
    let req: GenerateRequest = parse_body(&body)?;
    let graph = engine::parse_graph(&req.graph.to_string())?;
    let backend = engine::parse_backend(&req.backend)?;
    let store = app.snapshot();
    let out = blocking(move || engine::generate(&store, &graph, backend)).await?;
    Ok(ok(out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterRequest {
    threshold: f64,
    #[serde(default = "default_rounds")]
    rounds: usize,
    #[serde(default)]
    label_ops: bool,
}

fn default_rounds() -> usize {
    DEFAULT_ROUNDS
}

async fn cluster(State(app): Shared, body: Bytes) -> Reply {
    let req: ClusterRequest = parse_body(&body)?;
    let store = app.snapshot();
    let report =
        blocking(move || engine::cluster(&store, req.threshold, req.rounds, req.label_ops)).await?;
    Ok(ok(engine::to_json(&report)))
}

async fn search(State(app): Shared, Query(q): Query<HashMap<String, String>>) -> Reply {
    let description = q.get("q").cloned().unwrap_or_default();
    let provider = q
        .get("provider")
        .cloned()
        .unwrap_or_else(|| DEFAULT_PROVIDER.to_string());
    let harvester = app.harvester.clone();
    let hits = blocking(move || engine::harvest(&harvester, &description, &provider)).await?;
    Ok(ok(engine::to_json(&hits)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportRequest {
    candidate: SnippetCandidate,
    draft: Concept,
}

async fn import(State(app): Shared, body: Bytes) -> Reply {
    let req: ImportRequest = parse_body(&body)?;
    let id = req.draft.id.clone();
    let stored = app
        .mutate(move |store| {
            import_candidate(store, &req.candidate, req.draft)?;
            Ok(store.get(&id).cloned().expect("just imported"))
        })
        .await?;
    Ok(json_response(StatusCode::CREATED, engine::to_json(&stored)))
}

async fn fallback(uri: Uri) -> ApiError {
    ApiError::not_found(uri.path())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/concepts", get(list_concepts).post(add_concept))
        .route("/api/hierarchy", get(hierarchy))
        .route("/api/hierarchy/link", post(link))
        .route("/api/generate", post(generate))
        .route("/api/cluster", post(cluster))
        .route("/api/search", get(search))
        .route("/api/import", post(import))
        .fallback(fallback)
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
