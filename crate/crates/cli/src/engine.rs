//! Operations shared by the command line and the HTTP service, so both
//! return the same bytes for the same request.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use codemapper::graph::{parse_cmap, ConceptGraph};
use codemapper::harvester::{
    build_query, load_providers, Harvester, ProviderConfig, SnippetCandidate,
};
use codemapper::pdg::{cluster_snippets_with, ClusterReport, LabelOptions};
use codemapper::store::{search_concepts, SearchHit, Store};
use codemapper::synthesis::{synthesize, Backend};

use crate::error::ApiError;

/// Name of the provider used when none is given.
pub const DEFAULT_PROVIDER: &str = "local";

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("response serializes");
    out.push('\n');
    out
}

pub fn parse_backend(name: &str) -> Result<Backend, ApiError> {
    name.parse::<Backend>().map_err(ApiError::bad_request)
}

pub fn parse_graph(text: &str) -> Result<ConceptGraph, ApiError> {
    Ok(parse_cmap(text)?)
}

/// Synthesizes `graph` and returns the program as JSON text.
pub fn generate(store: &Store, graph: &ConceptGraph, backend: Backend) -> Result<String, ApiError> {
    let program = synthesize(store, graph, backend)?;
    Ok(to_json(&program))
}

pub fn search(store: &Store, query: &str) -> Vec<SearchHit> {
    search_concepts(store, query)
}

pub fn cluster(
    store: &Store,
    threshold: f64,
    rounds: usize,
    label_ops: bool,
) -> Result<ClusterReport, ApiError> {
    Ok(cluster_snippets_with(
        store,
        threshold,
        rounds,
        LabelOptions { ops: label_ops },
    )?)
}

/// Concepts with their kinds, and the `(child, parent)` isa edges.
pub fn hierarchy(store: &Store) -> Value {
    let concepts: Vec<Value> = store
        .concepts()
        .map(|c| json!({ "id": c.id, "name": c.name, "kind": c.kind }))
        .collect();
    let isa: Vec<Value> = store
        .isa_edges()
        .map(|(child, parent)| json!({ "child": child, "parent": parent }))
        .collect();
    json!({ "concepts": concepts, "isa": isa })
}

pub fn harvest(
    harvester: &Harvester,
    description: &str,
    provider: &str,
) -> Result<Vec<SnippetCandidate>, ApiError> {
    let keywords = build_query(description)?;
    Ok(harvester.search(provider, &keywords)?)
}

/// Directory holding the default local corpus for a store file.
pub fn default_corpus_dir(store_path: &Path) -> PathBuf {
    store_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .join("snippets")
}

/// Providers from `providers`, or a `providers.toml` next to the store, or
/// else a single local corpus named `local` in the `snippets` directory
/// next to the store (when it exists).
pub fn load_harvester(providers: Option<&Path>, store_path: &Path) -> Result<Harvester, ApiError> {
    let beside = default_corpus_dir(store_path).with_file_name("providers.toml");
    let configs = match providers {
        Some(path) => load_providers(path)?,
        None if beside.is_file() => load_providers(&beside)?,
        None => {
            let dir = default_corpus_dir(store_path);
            if dir.is_dir() {
                vec![ProviderConfig::local(DEFAULT_PROVIDER, dir)]
            } else {
                Vec::new()
            }
        }
    };
    Ok(Harvester::new(configs)?)
}
