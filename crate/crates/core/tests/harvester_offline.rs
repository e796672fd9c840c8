use std::sync::Mutex;
use std::time::Duration;

use codemapper::harvester::{
    build_query, search_local, search_provider, Clock, HarvestError, HttpReply, ManualClock,
    ProviderConfig, ProviderKind, RateLimiter, RemoteClient, Transport, WINDOW,
};
use proptest::prelude::*;

/// Three files; scores for [merge, sort] are worked out by reading them.
pub fn corpus_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("merge_sort.mini"),
        "// merge sort\nfunc merge_sort(xs: list) -> list { return xs; }\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("insertion.mini"),
        "// insertion sort\nfunc insertion(xs: list) -> list { return xs; }\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("gcd.mini"), "func gcd(a: int, b: int) { print(a); }\n").unwrap();
    dir
}

#[test]
fn local_ranking_matches_hand_scores() {
    let dir = corpus_dir();
    let cfg = ProviderConfig::local("corpus", dir.path());
    let kw = vec!["merge".to_string(), "sort".to_string()];
    let hits = search_provider(&cfg, &kw).unwrap();
    let got: Vec<_> = hits.iter().map(|h| (h.title.as_str(), h.score)).collect();
    assert_eq!(got, [("merge_sort.mini", 1.0), ("insertion.mini", 0.5)]);
    assert!(search_local(&cfg, &["zebra".to_string()]).unwrap().is_empty());
    assert_eq!(search_local(&cfg, &kw).unwrap(), hits, "local search is pure");
}

#[test]
fn missing_token_names_the_variable() {
    let cfg = ProviderConfig {
        name: "hub".into(),
        kind: ProviderKind::RemoteApi,
        base: "http://127.0.0.1:9/search".into(),
        auth_env: Some("CODEMAPPER_TEST_TOKEN_THAT_IS_NEVER_SET".into()),
        rate_per_min: 10,
        page_size: 10,
        max_pages: 1,
    };
    match search_provider(&cfg, &build_query("merge sort").unwrap()) {
        Err(HarvestError::AuthMissing { var }) => {
            assert_eq!(var, "CODEMAPPER_TEST_TOKEN_THAT_IS_NEVER_SET")
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unreachable_endpoint_is_an_error_not_an_empty_list() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    drop(listener);
    let cfg = ProviderConfig {
        name: "hub".into(),
        kind: ProviderKind::RemoteApi,
        base: format!("http://127.0.0.1:{port}/search"),
        auth_env: None,
        rate_per_min: 10,
        page_size: 10,
        max_pages: 1,
    };
    let err = search_provider(&cfg, &["merge".to_string()]).unwrap_err();
    assert_eq!(err.code(), "provider-unreachable");
}

/// Counts admissions in every window starting at an admission time.
fn max_in_any_window(times: &[Duration]) -> usize {
    times
        .iter()
        .map(|&t| times.iter().filter(|&&u| u >= t && u < t + WINDOW).count())
        .max()
        .unwrap_or(0)
}

proptest! {
    #[test]
    fn limiter_admits_at_most_n_per_window(
        max in 1u32..8,
        gaps in proptest::collection::vec(0u64..30_000, 1..80),
    ) {
        let limiter = RateLimiter::new(max, ManualClock::default());
        let mut admitted = Vec::new();
        for gap in gaps {
            limiter.clock().advance(Duration::from_millis(gap));
            if limiter.try_acquire().is_ok() {
                admitted.push(limiter.clock().now());
            }
        }
        prop_assert!(max_in_any_window(&admitted) <= max as usize);
    }

    #[test]
    fn blocking_acquire_spaces_requests(max in 1u32..6, calls in 1usize..30) {
        let limiter = RateLimiter::new(max, ManualClock::default());
        let mut times = Vec::new();
        for _ in 0..calls {
            limiter.acquire();
            times.push(limiter.clock().now());
        }
        prop_assert!(max_in_any_window(&times) <= max as usize);
        let expected_waits = (calls - 1) / max as usize;
        prop_assert_eq!(*times.last().unwrap(), WINDOW * expected_waits as u32);
    }
}

struct FullPages {
    calls: Mutex<usize>,
}

impl Transport for FullPages {
    fn get(&self, _: &str, _: &[(String, String)], _: Option<&str>) -> Result<HttpReply, String> {
        *self.calls.lock().unwrap() += 1;
        let items: Vec<_> = (0..2)
            .map(|i| serde_json::json!({"title": format!("t{i}"), "path": format!("p{i}"), "text": "merge"}))
            .collect();
        Ok(HttpReply {
            status: 200,
            retry_after: None,
            body: serde_json::json!({ "items": items }).to_string(),
        })
    }
}

#[test]
fn remote_client_goes_through_the_limiter() {
    let cfg = ProviderConfig {
        name: "hub".into(),
        kind: ProviderKind::RemoteApi,
        base: "http://hub.invalid/search".into(),
        auth_env: None,
        rate_per_min: 2,
        page_size: 2,
        max_pages: 3,
    };
    let transport = FullPages {
        calls: Mutex::default(),
    };
    let client = RemoteClient::new(cfg, transport, ManualClock::default());
    let hits = client.search(&["merge".to_string()]).unwrap();
    assert_eq!(hits.len(), 6);
    assert_eq!(*client.transport().calls.lock().unwrap(), 3);
    assert_eq!(client.limiter().clock().now(), WINDOW, "third page waits a full window");
}
