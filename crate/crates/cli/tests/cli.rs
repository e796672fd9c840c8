mod common;

use codemapper::demo;
use codemapper::harvester::{build_query, search_provider, ProviderConfig, SnippetCandidate};
use codemapper::minilang::Value;
use codemapper::pdg::cluster_snippets;
use codemapper::store::{load_store, search_concepts, SearchHit};
use codemapper_cli::{ApiError, ERROR_CODES};
use common::{codemapper, demo_dir, GRAPH};

fn sorted_fixture() -> String {
    let mut xs = demo::FIXTURE_LIST.to_vec();
    xs.sort_unstable();
    Value::List(xs.into_iter().map(Value::Int).collect()).to_string()
}

#[test]
fn generate_then_run_prints_the_sorted_list() {
    let (dir, _) = demo_dir();
    let gen = codemapper(
        dir.path(),
        &["generate", GRAPH, "--store", "demo.cmdb.json", "--backend", "minilang", "-o", "out.mini"],
    );
    assert_eq!(gen.code, 0, "{}", gen.stderr);
    let run = codemapper(dir.path(), &["run", "out.mini", "--entry", "main"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout, format!("{}\n", sorted_fixture()));
}

#[test]
fn second_identical_link_fails_with_one_line() {
    let (dir, _) = demo_dir();
    let args = ["link", "merge-sort", "ascending-sort", "--store", "demo.cmdb.json"];
    let first = codemapper(dir.path(), &args);
    assert_eq!(first.code, 1, "the example store already has this edge");
    assert!(first.stderr.contains("duplicate-edge"));
    assert_eq!(first.stderr.lines().count(), 1);

    let fresh = ["link", "heap-sort", "merge-sort", "--store", "demo.cmdb.json"];
    assert_eq!(codemapper(dir.path(), &fresh).code, 0);
    let again = codemapper(dir.path(), &fresh);
    assert_eq!(again.code, 1);
    assert!(again.stderr.contains("duplicate-edge"), "{}", again.stderr);
    assert_eq!(again.stderr.lines().count(), 1);
}

#[test]
fn json_errors_are_structured() {
    let (dir, _) = demo_dir();
    let run = codemapper(
        dir.path(),
        &["link", "ascending-sort", "merge-sort", "--store", "demo.cmdb.json", "--format", "json"],
    );
    assert_eq!(run.code, 1);
    assert_eq!(run.stderr.lines().count(), 1);
    let err: ApiError = serde_json::from_str(run.stderr.trim()).unwrap();
    assert_eq!(err.code, "cycle-rejected");
    assert_eq!(err.stage, "store");
    assert_eq!(
        err.detail["path"],
        serde_json::json!(["ascending-sort", "merge-sort", "ascending-sort"])
    );
    assert!(ERROR_CODES.contains(&err.code.as_str()));
}

#[test]
fn search_json_matches_the_engine() {
    let (dir, store) = demo_dir();
    let run = codemapper(dir.path(), &["search", "sort", "--store", "demo.cmdb.json", "--format", "json"]);
    assert_eq!(run.code, 0);
    let hits: Vec<SearchHit> = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(hits, search_concepts(&load_store(store).unwrap(), "sort"));
    let ids: Vec<_> = hits.iter().map(|h| h.id.as_str()).collect();
    for child in ["heap-sort", "merge-sort", "radix-sort", "insertion-sort"] {
        assert!(ids.contains(&child), "{child} missing from {ids:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(codemapper(dir.path(), &["frobnicate"]).code, 2);
    assert_eq!(codemapper(dir.path(), &["link", "only-one"]).code, 2);
    assert_eq!(codemapper(dir.path(), &["--help"]).code, 0);
}

#[test]
fn init_refuses_to_overwrite() {
    let (dir, _) = demo_dir();
    let again = codemapper(dir.path(), &["init", "--store", "demo.cmdb.json"]);
    assert_eq!(again.code, 1);
    let forced = codemapper(dir.path(), &["init", "--force", "--store", "demo.cmdb.json"]);
    assert_eq!(forced.code, 0);
    assert!(load_store(dir.path().join("demo.cmdb.json")).unwrap().is_empty());
}

#[test]
fn add_persists_and_rejects_bad_snippets() {
    let (dir, store) = demo_dir();
    let concept = serde_json::json!({
        "id": "reverse-list",
        "name": "Reverse list",
        "kind": "terminal",
        "keywords": ["reverse"],
        "inputs": [{"name": "xs", "dtype": "list"}],
        "outputs": [{"name": "reversed", "dtype": "list"}],
        "curation": {"author": "t", "created": "2024-01-01T00:00:00Z"},
        "snippet": demo::snippet("reverse_list"),
    });
    std::fs::write(dir.path().join("c.json"), concept.to_string()).unwrap();
    let run = codemapper(dir.path(), &["add", "-f", "c.json", "--store", "demo.cmdb.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(load_store(&store).unwrap().contains(&"reverse-list".parse().unwrap()));

    let mut broken = concept.clone();
    broken["id"] = "broken".into();
    broken["snippet"] = "func broken(xs: list) -> list { return xs".into();
    std::fs::write(dir.path().join("b.json"), broken.to_string()).unwrap();
    let run = codemapper(
        dir.path(),
        &["add", "-f", "b.json", "--store", "demo.cmdb.json", "--format", "json"],
    );
    assert_eq!(run.code, 1);
    let err: ApiError = serde_json::from_str(run.stderr.trim()).unwrap();
    assert_eq!(err.code, "snippet-parse-error");
    assert_eq!(err.detail["line"], 1);
}

#[test]
fn run_passes_arguments() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gcd.mini"), demo::snippet("gcd")).unwrap();
    let run = codemapper(dir.path(), &["run", "gcd.mini", "--entry", "gcd", "--arg", "84", "--arg", "36"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout.trim(), "12");
}

#[test]
fn cluster_matches_the_engine_and_writes_the_matrix() {
    let (dir, store) = demo_dir();
    let run = codemapper(
        dir.path(),
        &[
            "cluster", "--threshold", "0.9", "--rounds", "3", "--matrix", "m.csv",
            "--store", "demo.cmdb.json", "--format", "json",
        ],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let expected = cluster_snippets(&load_store(store).unwrap(), 0.9, 3).unwrap();
    assert_eq!(run.stdout, codemapper_cli::engine::to_json(&expected));
    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(csv, expected.matrix_csv());

    let bad = codemapper(dir.path(), &["cluster", "--threshold", "0", "--store", "demo.cmdb.json"]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("threshold-out-of-range"));
}

#[test]
fn harvest_ranks_like_the_provider() {
    let (dir, _) = demo_dir();
    let run = codemapper(
        dir.path(),
        &["harvest", "merge sort", "--provider", "local", "--store", "demo.cmdb.json", "--format", "json"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let got: Vec<SnippetCandidate> = serde_json::from_str(&run.stdout).unwrap();
    let cfg = ProviderConfig::local("local", dir.path().join("snippets"));
    let direct = search_provider(&cfg, &build_query("merge sort").unwrap()).unwrap();
    let key = |c: &SnippetCandidate| (c.title.clone(), c.score);
    assert_eq!(got.iter().map(key).collect::<Vec<_>>(), direct.iter().map(key).collect::<Vec<_>>());
    assert_eq!(got[0].title, "merge_sort.mini");

    let missing = codemapper(
        dir.path(),
        &["harvest", "merge", "--provider", "nowhere", "--store", "demo.cmdb.json"],
    );
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("unknown-provider"));
}
