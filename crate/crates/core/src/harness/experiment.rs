use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Granularity, GridConfig};
use crate::diversify::{Algorithm, DiversifyConfig, Param};
use crate::error::{Error, Result};
use crate::metrics::{
    build_spaces, cross_validate, evaluate_topic, format_run, load_qrels, load_topics, CellError, Judgments, Metric, MetricReport,
    RunEntry, SpaceKind, Spaces, Topic,
};
use crate::priors::{default_burst_window, PriorConfig};
use crate::relevance::{load_precomputed_scores, CandidateSet};

use super::{Engine, ExperimentConfig};

/// One algorithm with fixed parameters on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSpec {
    pub granularity: Granularity,
    pub diversify: DiversifyConfig,
    pub priors: PriorConfig,
}

impl RunSpec {
    /// `name:param=value,...` listing only the parameters the algorithm reads.
    pub fn params_label(&self) -> String {
        let d = &self.diversify;
        let parts: Vec<String> = d
            .algorithm
            .params()
            .iter()
            .map(|p| {
                let v = match p {
                    Param::Alpha => d.alpha,
                    Param::Beta => d.beta,
                    Param::Lambda => d.lambda,
                    Param::Theta => self.priors.theta,
                    Param::W => d.w,
                    Param::BurstWindow => self.priors.burst_window as f64,
                    Param::BurstSigma => self.priors.burst_sigma,
                };
                format!("{}={v}", p.name())
            })
            .collect();
        if parts.is_empty() {
            d.algorithm.to_string()
        } else {
            format!("{}:{}", d.algorithm, parts.join(","))
        }
    }

    /// Run name used in reports: parameters plus granularity.
    pub fn label(&self) -> String {
        let p = self.params_label();
        match p.split_once(':') {
            Some((name, rest)) => format!("{name}@{}:{rest}", self.granularity),
            None => format!("{p}@{}", self.granularity),
        }
    }

    fn file_stem(&self) -> String {
        self.params_label().replace([':', ','], "_")
    }
}

/// Every parameter combination of `algorithm` drawn from the config grids.
pub fn expand_specs(config: &ExperimentConfig, algorithm: Algorithm, granularity: Granularity, depth: usize) -> Vec<RunSpec> {
    let prior = PriorConfig::for_granularity(granularity);
    let mut specs = vec![(DiversifyConfig::new(algorithm, depth), prior)];
    for &param in algorithm.params() {
        let values = match param {
            Param::BurstWindow if config.grid.burst_window.is_none() => vec![default_burst_window(granularity) as f64],
            p => config.grid.values(p),
        };
        specs = specs
            .into_iter()
            .flat_map(|(d, p)| {
                values.iter().map(move |&v| {
                    let (mut d, mut p) = (d, p);
                    match param {
                        Param::Alpha => d.alpha = v,
                        Param::Beta => d.beta = v,
                        Param::Lambda => d.lambda = v,
                        Param::W => d.w = v,
                        Param::Theta => p.theta = v,
                        Param::BurstWindow => p.burst_window = v as usize,
                        Param::BurstSigma => p.burst_sigma = v,
                    }
                    (d, p)
                })
            })
            .collect();
    }
    specs
        .into_iter()
        .map(|(diversify, priors)| RunSpec {
            granularity,
            diversify,
            priors,
        })
        .collect()
}

/// Inputs shared by experiments and sweeps.
pub struct Workspace {
    pub config: ExperimentConfig,
    pub engine: Engine,
    pub topics: Vec<Topic>,
    pub judgments: Judgments,
}

impl Workspace {
    pub fn load(config: ExperimentConfig) -> Result<Workspace> {
        config.validate()?;
        let granularity = config.granularities[0];
        let corpus = match (config.span_begin, config.span_end) {
            (Some(b), Some(e)) => Corpus::load(
                &config.corpus,
                &GridConfig {
                    span_begin: b,
                    span_end: e,
                    granularity,
                },
            )?,
            _ => Corpus::load_spanning(&config.corpus, granularity)?,
        };
        let corpus = corpus.filter_aspects(config.idf_threshold);
        let topics = load_topics(&config.topics)?;
        let span = corpus.grid().span();
        for t in &topics {
            t.validate(Some(span))?;
        }
        let judgments = load_qrels(&config.qrels)?;
        judgments.validate(&topics)?;
        let mut engine = Engine::new(corpus, config.mu, config.candidates);
        if let Some(path) = &config.scores {
            let scores = load_precomputed_scores(path, engine.corpus(), config.candidates)?;
            engine = engine.with_precomputed(scores);
        }
        Ok(Workspace {
            config,
            engine,
            topics,
            judgments,
        })
    }

    pub fn from_parts(
        config: ExperimentConfig,
        engine: Engine,
        topics: Vec<Topic>,
        judgments: Judgments,
    ) -> Result<Workspace> {
        config.validate()?;
        Ok(Workspace {
            config,
            engine,
            topics,
            judgments,
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.worker_count())
            .build()
            .map_err(|e| Error::validation(format!("cannot start worker pool: {e}")))
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub spec: RunSpec,
    pub topic: String,
    pub entries: Vec<RunEntry>,
}

impl RunRecord {
    pub fn relative_path(&self) -> PathBuf {
        PathBuf::from("runs")
            .join(self.spec.granularity.as_str())
            .join(&self.topic)
            .join(format!("{}.run", self.spec.file_stem()))
    }

    pub fn render(&self) -> String {
        format_run(&self.topic, &self.entries, &self.spec.params_label().replace(' ', "_"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub report: MetricReport,
    pub runs: Vec<RunRecord>,
}

struct Cell {
    spec: RunSpec,
    topic: usize,
}

/// Retrieve, re-rank and evaluate every (granularity, topic, algorithm,
/// parameter) cell. Results do not depend on the worker count.
pub fn run_experiment(ws: &Workspace) -> Result<ExperimentOutput> {
    let config = &ws.config;
    let depth = *config.depths.iter().max().expect("validated depths");
    let pool = ws.pool()?;
    pool.install(|| {
        let candidates: Vec<Result<CandidateSet>> = ws
            .topics
            .par_iter()
            .map(|t| ws.engine.retrieve_topic(&t.id, &t.query))
            .collect();
        let mut out = ExperimentOutput::default();
        for &granularity in &config.granularities {
            let engine = ws.engine.with_granularity(granularity)?;
            let spaces: Vec<Result<Spaces>> = ws
                .topics
                .iter()
                .map(|t| build_spaces(t, &ws.judgments, engine.corpus(), config.time_relevance))
                .collect();
            for (t, s) in ws.topics.iter().zip(&spaces) {
                if let Ok(s) = s {
                    for kind in SpaceKind::ALL {
                        if !s.get(kind).is_evaluable() {
                            log::warn!("topic {} has no relevant documents in {kind} space; skipped there", t.id);
                        }
                    }
                }
            }
            let cells: Vec<Cell> = config
                .algorithms
                .iter()
                .flat_map(|&a| expand_specs(config, a, granularity, depth))
                .flat_map(|spec| (0..ws.topics.len()).map(move |topic| Cell { spec, topic }))
                .collect();
            let results: Vec<_> = cells
                .par_iter()
                .map(|cell| {
                    let topic = &ws.topics[cell.topic];
                    let result = run_cell(&engine, &candidates[cell.topic], &cell.spec).and_then(|entries| {
                        let spaces = spaces[cell.topic].as_ref().map_err(Clone::clone)?;
                        let docs: Vec<String> = entries.iter().map(|e| e.doc.clone()).collect();
                        let rows = evaluate_topic(&cell.spec.label(), &topic.id, &docs, spaces, &config.depths);
                        Ok((entries, rows))
                    });
                    (cell, result)
                })
                .collect();
            for (cell, result) in results {
                let topic = &ws.topics[cell.topic].id;
                match result {
                    Ok((entries, rows)) => {
                        out.report.rows.extend(rows);
                        out.runs.push(RunRecord {
                            spec: cell.spec,
                            topic: topic.clone(),
                            entries,
                        });
                    }
                    Err(e) => {
                        log::warn!("{} on topic {topic}: {e}", cell.spec.label());
                        out.report.errors.push(CellError {
                            run: cell.spec.label(),
                            topic: topic.clone(),
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
        out.report.sort();
        Ok(out)
    })
}

fn run_cell(engine: &Engine, candidates: &Result<CandidateSet>, spec: &RunSpec) -> Result<Vec<RunEntry>> {
    let candidates = candidates.as_ref().map_err(Clone::clone)?;
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates(None));
    }
    let priors = engine.priors(candidates, &spec.priors)?;
    let ranking = engine.rerank(candidates, &priors, &spec.diversify)?;
    let corpus = engine.corpus();
    Ok(ranking
        .steps
        .iter()
        .map(|s| RunEntry {
            doc: corpus.document(s.doc).id.clone(),
            score: s.gain,
        })
        .collect())
}

impl ExperimentOutput {
    /// Write run files, `report.tsv` and `summary.txt` below `dir`; returns
    /// the written paths.
    pub fn write(&self, dir: &Path, baseline: Algorithm) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        let mut put = |path: PathBuf, body: &str| -> Result<()> {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        for run in &self.runs {
            put(dir.join(run.relative_path()), &run.render())?;
        }
        put(dir.join("report.tsv"), &self.report.to_tsv())?;
        put(dir.join("summary.txt"), &self.summary(baseline))?;
        Ok(written)
    }

    /// Table of mean SBR per granularity, with AT win/loss against the
    /// baseline.
    pub fn summary(&self, baseline: Algorithm) -> String {
        let mut grans: Vec<Granularity> = self.runs.iter().map(|r| r.spec.granularity).collect();
        grans.sort();
        grans.dedup();
        let mut out = String::new();
        for g in grans {
            let suffix = format!("@{g}");
            let part = MetricReport {
                rows: self
                    .report
                    .rows
                    .iter()
                    .filter(|r| r.run.split(':').next().is_some_and(|n| n.ends_with(&suffix)))
                    .cloned()
                    .collect(),
                errors: vec![],
            };
            let base = format!("{baseline}{suffix}");
            let _ = writeln!(out, "granularity: {g}");
            out.push_str(&part.summary(Metric::Sbr, &base));
            out.push('\n');
        }
        out
    }
}

/// Cross-validated tuning result for one algorithm on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub granularity: Granularity,
    pub algorithm: Algorithm,
    pub specs: Vec<RunSpec>,
    pub cv: crate::metrics::CvResult,
    /// Held-out AT-SBR per topic under the parameters chosen for its fold.
    pub held_out: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub entries: Vec<SweepEntry>,
    pub experiment: ExperimentOutput,
}

/// Tune every algorithm for AT-SBR at the tuning depth with k-fold
/// cross-validation.
pub fn sweep(ws: &Workspace) -> Result<SweepOutput> {
    let config = &ws.config;
    let experiment = run_experiment(ws)?;
    let k = config.tune_depth;
    let depth = *config.depths.iter().max().expect("validated depths");
    let mut entries = Vec::new();
    for &granularity in &config.granularities {
        for &algorithm in &config.algorithms {
            let specs = expand_specs(config, algorithm, granularity, depth);
            let scores: Vec<BTreeMap<String, f64>> = specs
                .iter()
                .map(|s| experiment.report.per_topic(&s.label(), Metric::Sbr, SpaceKind::AT, k))
                .collect();
            let mut topics: Vec<String> = scores.iter().flat_map(|m| m.keys().cloned()).collect();
            topics.sort();
            topics.dedup();
            if topics.is_empty() {
                log::warn!("{algorithm}@{granularity}: no evaluable topics at k={k}");
                continue;
            }
            let cv = cross_validate(specs.len(), &topics, config.folds, |p, t| scores[p].get(t).copied())?;
            let held_out = cv
                .folds
                .iter()
                .flat_map(|f| {
                    f.test_topics
                        .iter()
                        .filter_map(|t| scores[f.chosen].get(t).map(|&v| (t.clone(), v)))
                })
                .collect();
            entries.push(SweepEntry {
                granularity,
                algorithm,
                specs,
                cv,
                held_out,
            });
        }
    }
    Ok(SweepOutput { entries, experiment })
}

impl SweepOutput {
    pub fn entry(&self, algorithm: Algorithm, granularity: Granularity) -> Option<&SweepEntry> {
        self.entries
            .iter()
            .find(|e| e.algorithm == algorithm && e.granularity == granularity)
    }

    /// `granularity algorithm fold params train test` rows, then one mean
    /// row per algorithm.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("granularity\talgorithm\tfold\tparams\ttrain\ttest\n");
        for e in &self.entries {
            for (i, f) in e.cv.folds.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    e.granularity,
                    e.algorithm,
                    i + 1,
                    e.specs[f.chosen].params_label(),
                    f.train_score,
                    f.test_score
                );
            }
            let _ = writeln!(
                out,
                "{}\t{}\tmean\t-\t-\t{}",
                e.granularity, e.algorithm, e.cv.mean_test_score
            );
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("sweep.tsv");
        fs::write(&path, self.to_tsv()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
