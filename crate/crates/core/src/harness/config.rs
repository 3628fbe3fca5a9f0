use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::Granularity;
use crate::diversify::{Algorithm, Param};
use crate::error::{Error, Result};
use crate::metrics::{TimeRelevance, DEFAULT_FOLDS, DEFAULT_ITERATIONS};
use crate::priors::DEFAULT_BURST_SIGMA;
use crate::relevance::{DEFAULT_CANDIDATES, DEFAULT_MU};

pub const DEFAULT_IDF_THRESHOLD: f64 = 0.2;
pub const WORKERS_ENV: &str = "HISTDIV_WORKERS";

/// Values tried for every tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamGrid {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub w: Vec<f64>,
    /// `None` uses the default window of each granularity.
    pub burst_window: Option<Vec<usize>>,
    pub burst_sigma: Vec<f64>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        let d = |p: Param| vec![p.range().2];
        ParamGrid {
            alpha: d(Param::Alpha),
            beta: d(Param::Beta),
            theta: d(Param::Theta),
            lambda: d(Param::Lambda),
            w: d(Param::W),
            burst_window: None,
            burst_sigma: vec![DEFAULT_BURST_SIGMA],
        }
    }
}

impl ParamGrid {
    pub fn values(&self, param: Param) -> Vec<f64> {
        match param {
            Param::Alpha => self.alpha.clone(),
            Param::Beta => self.beta.clone(),
            Param::Theta => self.theta.clone(),
            Param::Lambda => self.lambda.clone(),
            Param::W => self.w.clone(),
            Param::BurstWindow => self
                .burst_window
                .as_ref()
                .map(|v| v.iter().map(|&x| x as f64).collect())
                .unwrap_or_default(),
            Param::BurstSigma => self.burst_sigma.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let params = [
            Param::Alpha,
            Param::Beta,
            Param::Theta,
            Param::Lambda,
            Param::W,
            Param::BurstSigma,
        ];
        for p in params {
            let (lo, hi, _) = p.range();
            let values = self.values(p);
            if values.is_empty() {
                return Err(Error::validation(format!("parameter grid for {} is empty", p.name())));
            }
            if let Some(v) = values.iter().find(|v| !(lo..=hi).contains(*v)) {
                return Err(Error::validation(format!(
                    "{} = {v} is outside [{lo}, {hi}]",
                    p.name()
                )));
            }
        }
        if let Some(windows) = &self.burst_window {
            if windows.is_empty() {
                return Err(Error::validation("parameter grid for burst_window is empty"));
            }
            if let Some(w) = windows.iter().find(|&&w| w < 2) {
                return Err(Error::validation(format!("burst_window = {w} is below 2")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    /// Optional `query_id<TAB>doc_id<TAB>score` file replacing retrieval.
    pub scores: Option<PathBuf>,
    pub output: PathBuf,
    pub algorithms: Vec<Algorithm>,
    pub depths: Vec<usize>,
    pub granularities: Vec<Granularity>,
    pub span_begin: Option<NaiveDate>,
    pub span_end: Option<NaiveDate>,
    pub grid: ParamGrid,
    pub idf_threshold: f64,
    pub mu: f64,
    pub candidates: usize,
    pub folds: usize,
    /// Depth whose AT-SBR the sweep tunes for.
    pub tune_depth: usize,
    pub baseline: Algorithm,
    pub iterations: usize,
    pub seed: u64,
    pub time_relevance: TimeRelevance,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: PathBuf::from("corpus.jsonl"),
            topics: PathBuf::from("topics.json"),
            qrels: PathBuf::from("qrels.tsv"),
            scores: None,
            output: PathBuf::from("out"),
            algorithms: Algorithm::ALL.to_vec(),
            depths: vec![10, 15, 20],
            granularities: Granularity::ALL.to_vec(),
            span_begin: None,
            span_end: None,
            grid: ParamGrid::default(),
            idf_threshold: DEFAULT_IDF_THRESHOLD,
            mu: DEFAULT_MU,
            candidates: DEFAULT_CANDIDATES,
            folds: DEFAULT_FOLDS,
            tune_depth: 10,
            baseline: Algorithm::Lm,
            iterations: DEFAULT_ITERATIONS,
            seed: 42,
            time_relevance: TimeRelevance::default(),
            workers: None,
        }
    }
}

impl ExperimentConfig {
    /// Read a TOML file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_owned(),
        })?;
        if let Some(base) = path.parent() {
            for p in [&mut config.corpus, &mut config.topics, &mut config.qrels, &mut config.output] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            if let Some(p) = config.scores.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::validation("no algorithms configured"));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::validation("depths must be a non-empty list of positive values"));
        }
        if self.granularities.is_empty() {
            return Err(Error::validation("no granularities configured"));
        }
        if let (Some(b), Some(e)) = (self.span_begin, self.span_end) {
            if b > e {
                return Err(Error::validation(format!("span {b}..{e} is inverted")));
            }
        } else if self.span_begin.is_some() != self.span_end.is_some() {
            return Err(Error::validation("set both span_begin and span_end or neither"));
        }
        if !(0.0..=1.0).contains(&self.idf_threshold) {
            return Err(Error::validation(format!(
                "idf_threshold must lie in [0, 1], got {}",
                self.idf_threshold
            )));
        }
        if self.mu.is_nan() || self.mu <= 0.0 {
            return Err(Error::validation(format!("mu must be positive, got {}", self.mu)));
        }
        if self.candidates == 0 {
            return Err(Error::validation("candidates must be at least 1"));
        }
        if self.folds < 2 {
            return Err(Error::validation(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.tune_depth == 0 {
            return Err(Error::validation("tune_depth must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::validation("workers must be at least 1"));
        }
        self.grid.validate()
    }

    /// Worker count: the config value, else `HISTDIV_WORKERS`, else one per
    /// core.
    pub fn worker_count(&self) -> usize {
        self.workers
            .or_else(|| std::env::var(WORKERS_ENV).ok()?.parse().ok().filter(|&n| n > 0))
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
