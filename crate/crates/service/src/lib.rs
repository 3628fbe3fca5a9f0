//! Read-only HTTP front end: diversified search plus the timeline and burst
//! data an exploration UI needs.
//!
//! Routes:
//!
//! * `GET /search?q=..&algo=..&k=..&alpha=..&beta=..&theta=..&granularity=..`
//! * `GET /algorithms`

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use histdiv_core::diversify::{Algorithm, DiversifyConfig, Param};
use histdiv_core::harness::Engine;
use histdiv_core::priors::{default_burst_window, PriorConfig};
use histdiv_core::{Error, Granularity};

pub const MAX_K: usize = 100;
pub const SNIPPET_CHARS: usize = 200;

/// Engines for every granularity, sharing one index.
#[derive(Clone)]
pub struct AppState {
    engines: Arc<HashMap<Granularity, Engine>>,
    default_granularity: Granularity,
}

impl AppState {
    pub fn new(engine: Engine) -> Result<AppState, Error> {
        let default_granularity = engine.corpus().grid().granularity();
        let mut engines = HashMap::new();
        for g in Granularity::ALL {
            engines.insert(g, engine.with_granularity(g)?);
        }
        Ok(AppState {
            engines: Arc::new(engines),
            default_granularity,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SearchParams {
    pub q: Option<String>,
    pub algo: Option<String>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub w: Option<f64>,
    pub theta: Option<f64>,
    pub granularity: Option<String>,
    pub burst_window: Option<usize>,
    pub burst_sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsedParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub w: f64,
    pub theta: f64,
    pub granularity: Granularity,
    pub burst_window: usize,
    pub burst_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    pub rank: usize,
    pub id: String,
    pub published: NaiveDate,
    pub aspects: Vec<String>,
    pub snippet: String,
    pub score: f64,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineBin {
    pub label: String,
    pub begin: NaiveDate,
    pub end: NaiveDate,
    pub count: usize,
    pub prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstSegment {
    pub begin: usize,
    pub end: usize,
    pub begin_label: String,
    pub end_label: String,
    pub bursty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub query: String,
    pub algorithm: Algorithm,
    pub params: UsedParams,
    pub candidates: usize,
    pub results: Vec<ResultItem>,
    pub timeline: Vec<TimelineBin>,
    pub bursts: Vec<BurstSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDescriptor {
    pub name: String,
    pub min: f64,
    /// `None` when unbounded.
    pub max: Option<f64>,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmDescriptor {
    pub name: String,
    pub params: Vec<ParamDescriptor>,
}

/// Error body: `{"error": "..."}` with the matching status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let status = match &e {
            Error::EmptyCandidates(_) => StatusCode::NOT_FOUND,
            e if e.is_validation() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}", self.message);
        }
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

pub fn algorithm_descriptors() -> Vec<AlgorithmDescriptor> {
    Algorithm::ALL
        .iter()
        .map(|a| AlgorithmDescriptor {
            name: a.as_str().to_owned(),
            params: a
                .params()
                .iter()
                .map(|p| {
                    let (min, max, default) = p.range();
                    ParamDescriptor {
                        name: p.name().to_owned(),
                        min,
                        max: max.is_finite().then_some(max),
                        default,
                    }
                })
                .collect(),
        })
        .collect()
}

fn resolve(state: &AppState, p: &SearchParams) -> Result<(String, DiversifyConfig, PriorConfig, Granularity), ApiError> {
    let query = p
        .q
        .as_deref()
        .map(str::trim)
        .filter(|q| !q.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing query parameter q"))?
        .to_owned();
    let algorithm: Algorithm = p.algo.as_deref().unwrap_or("histdiv").parse()?;
    let k = p.k.unwrap_or(10);
    if !(1..=MAX_K).contains(&k) {
        return Err(ApiError::bad_request(format!("k must lie in [1, {MAX_K}], got {k}")));
    }
    let granularity = match p.granularity.as_deref() {
        Some(g) => g.parse::<Granularity>()?,
        None => state.default_granularity,
    };
    let mut d = DiversifyConfig::new(algorithm, k);
    let default = |param: Param| param.range().2;
    d.alpha = p.alpha.unwrap_or(default(Param::Alpha));
    d.beta = p.beta.unwrap_or(default(Param::Beta));
    d.lambda = p.lambda.unwrap_or(default(Param::Lambda));
    d.w = p.w.unwrap_or(default(Param::W));
    d.validate()?;
    let mut priors = PriorConfig::for_granularity(granularity);
    priors.theta = p.theta.unwrap_or(priors.theta);
    priors.burst_window = p.burst_window.unwrap_or(default_burst_window(granularity));
    priors.burst_sigma = p.burst_sigma.unwrap_or(priors.burst_sigma);
    if !(0.0..=1.0).contains(&priors.theta) {
        return Err(ApiError::bad_request(format!("theta must lie in [0, 1], got {}", priors.theta)));
    }
    if priors.burst_window < 2 || priors.burst_sigma.is_nan() || priors.burst_sigma < 0.0 {
        return Err(ApiError::bad_request("burst_window must be at least 2 and burst_sigma non-negative"));
    }
    Ok((query, d, priors, granularity))
}

/// Run one search synchronously.
pub fn search(state: &AppState, params: &SearchParams) -> Result<QueryResponse, ApiError> {
    let (query, d, priors, granularity) = resolve(state, params)?;
    let engine = &state.engines[&granularity];
    let outcome = engine.search(&query, &d, &priors)?;
    let corpus = engine.corpus();
    let grid = corpus.grid();
    let results = outcome
        .ranking
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let doc = corpus.document(s.doc);
            ResultItem {
                rank: i + 1,
                id: doc.id.clone(),
                published: doc.published,
                aspects: doc.aspects.iter().map(|&a| corpus.aspect_name(a).to_owned()).collect(),
                snippet: doc
                    .text
                    .as_deref()
                    .map(|t| t.chars().take(SNIPPET_CHARS).collect())
                    .unwrap_or_default(),
                score: s.gain,
                relevance: s.relevance,
            }
        })
        .collect();
    let timeline = (0..grid.len())
        .map(|i| {
            let iv = grid.interval(i);
            TimelineBin {
                label: grid.label(i),
                begin: iv.begin,
                end: iv.end,
                count: outcome.priors.counts[i],
                prior: outcome.priors.temporal.get(i),
            }
        })
        .collect();
    let bursts = outcome
        .priors
        .bursts
        .segments
        .iter()
        .map(|s| BurstSegment {
            begin: s.begin,
            end: s.end,
            begin_label: grid.label(s.begin),
            end_label: grid.label(s.end),
            bursty: s.bursty,
        })
        .collect();
    Ok(QueryResponse {
        query,
        algorithm: d.algorithm,
        params: UsedParams {
            k: d.k,
            alpha: d.alpha,
            beta: d.beta,
            lambda: d.lambda,
            w: d.w,
            theta: priors.theta,
            granularity,
            burst_window: priors.burst_window,
            burst_sigma: priors.burst_sigma,
        },
        candidates: outcome.candidates.len(),
        results,
        timeline,
        bursts,
    })
}

async fn search_handler(
    State(state): State<AppState>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> Result<Json<QueryResponse>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::bad_request(e.body_text()))?;
    tokio::task::spawn_blocking(move || search(&state, &params))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: format!("search task failed: {e}"),
        })?
        .map(Json)
}

async fn algorithms_handler() -> Json<Vec<AlgorithmDescriptor>> {
    Json(algorithm_descriptors())
}

async fn allow_any_origin(mut response: Response) -> Response {
    response
        .headers_mut()
        .insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    response
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/search", get(search_handler))
        .route("/algorithms", get(algorithms_handler))
        .layer(axum::middleware::map_response(allow_any_origin))
        .with_state(state)
}

/// Bind and serve until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

/// Blocking wrapper around [`serve`] for callers without a runtime.
pub fn run(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(addr, state))
}
