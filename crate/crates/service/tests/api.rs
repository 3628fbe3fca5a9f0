use std::sync::OnceLock;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use histdiv_core::corpus::Corpus;
use histdiv_core::harness::Engine;
use histdiv_core::synth::{generate, SynthConfig};
use histdiv_core::Granularity;
use histdiv_service::{router, AppState, QueryResponse};

fn state() -> AppState {
    static STATE: OnceLock<AppState> = OnceLock::new();
    STATE
        .get_or_init(|| {
            let config = SynthConfig {
                docs: 1000,
                topics: 2,
                ..SynthConfig::default()
            };
            let archive = generate(&config).unwrap();
            let grid = config.grid_config(Granularity::Month).build().unwrap();
            let corpus = Corpus::from_records(archive.records, grid).unwrap().filter_aspects(0.2);
            AppState::new(Engine::new(corpus, 1000.0, 1000)).unwrap()
        })
        .clone()
}

async fn get(uri: &str) -> (StatusCode, Option<String>, Value) {
    let response = router(state())
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let cors = response
        .headers()
        .get("access-control-allow-origin")
        .map(|v| v.to_str().unwrap().to_owned());
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, cors, serde_json::from_slice(&bytes).unwrap())
}

async fn search(uri: &str) -> QueryResponse {
    let (status, _, body) = get(uri).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    serde_json::from_value(body).unwrap()
}

#[tokio::test]
async fn search_returns_k_results_with_cors() {
    let (status, cors, body) = get("/search?q=topic01&k=7").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(cors.as_deref(), Some("*"));
    let r: QueryResponse = serde_json::from_value(body).unwrap();
    assert_eq!(r.results.len(), 7);
    assert_eq!(r.algorithm.as_str(), "histdiv");
    assert_eq!(r.params.k, 7);
    for (i, item) in r.results.iter().enumerate() {
        assert_eq!(item.rank, i + 1);
        assert!(item.snippet.chars().count() <= 200);
    }
}

#[tokio::test]
async fn repeated_queries_are_identical() {
    let uri = "/search?q=topic02&algo=histdiv-burst&k=20&alpha=0.3&beta=0.7&theta=0.4";
    assert_eq!(search(uri).await, search(uri).await);
}

#[tokio::test]
async fn timeline_counts_cover_all_candidates() {
    let r = search("/search?q=topic01&granularity=year").await;
    assert_eq!(r.params.granularity, Granularity::Year);
    assert_eq!(r.timeline.len(), 20);
    assert_eq!(r.timeline.iter().map(|b| b.count).sum::<usize>(), r.candidates);
    let total: f64 = r.timeline.iter().map(|b| b.prior).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(!r.bursts.is_empty());
}

#[tokio::test]
async fn lm_follows_relevance_order() {
    let r = search("/search?q=topic01&algo=lm&k=30").await;
    for pair in r.results.windows(2) {
        assert!(pair[0].relevance >= pair[1].relevance);
    }
}

#[tokio::test]
async fn bad_requests_get_json_errors() {
    for uri in [
        "/search?q=topic01&k=0",
        "/search?q=topic01&k=101",
        "/search?q=topic01&alpha=1.5",
        "/search?q=topic01&algo=nope",
        "/search?q=topic01&k=ten",
        "/search?q=topic01&granularity=week",
        "/search",
    ] {
        let (status, cors, body) = get(uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(cors.as_deref(), Some("*"));
        assert!(body["error"].is_string(), "{uri}");
    }
}

#[tokio::test]
async fn unmatched_query_is_not_found() {
    let (status, _, body) = get("/search?q=zzzunknown").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].is_string());
}

#[tokio::test]
async fn algorithms_lists_every_method() {
    let (status, _, body) = get("/algorithms").await;
    assert_eq!(status, StatusCode::OK);
    let algos = body.as_array().unwrap();
    assert_eq!(algos.len(), 12);
    let names: Vec<&str> = algos.iter().map(|a| a["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"histdiv"));
    assert!(names.contains(&"histdiv-burst"));
    let histdiv = algos.iter().find(|a| a["name"] == "histdiv").unwrap();
    let params: Vec<&str> = histdiv["params"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert!(params.contains(&"alpha") && params.contains(&"beta"));
}
