use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use histdiv_core::corpus::{read_records, Corpus, GridConfig};
use histdiv_core::diversify::{Algorithm, DiversifyConfig, Param};
use histdiv_core::error::{Error, Result};
use histdiv_core::harness::{
    annotate_fallback, run_experiment, sweep, AspectDictionary, Engine, ExperimentConfig, Workspace,
    DEFAULT_IDF_THRESHOLD,
};
use histdiv_core::metrics::{
    build_spaces, evaluate_topic, format_run, load_qrels, load_run, load_topics, Metric, MetricReport, RunEntry,
    TimeRelevance, Topic,
};
use histdiv_core::priors::{PriorConfig, DEFAULT_BURST_SIGMA, DEFAULT_THETA};
use histdiv_core::relevance::{load_precomputed_scores, CandidateSet, DEFAULT_CANDIDATES, DEFAULT_MU};
use histdiv_core::synth::{generate, SynthConfig};
use histdiv_core::Granularity;

/// Temporal diversification of archive search results.
#[derive(Parser)]
#[command(name = "histdiv", version)]
struct Cli {
    #[command(flatten)]
    grid: GridArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    /// First day of the time grid (defaults to January 1st of the earliest year in the corpus).
    #[arg(long, global = true)]
    span_begin: Option<NaiveDate>,
    /// Last day of the time grid (defaults to December 31st of the latest year).
    #[arg(long, global = true)]
    span_end: Option<NaiveDate>,
    /// Elementary interval size: month or year.
    #[arg(long, global = true)]
    granularity: Option<Granularity>,
}

impl GridArgs {
    fn granularity(&self) -> Granularity {
        self.granularity.unwrap_or(Granularity::Month)
    }

    fn load(&self, path: &Path, idf_threshold: f64) -> Result<Corpus> {
        let corpus = match (self.span_begin, self.span_end) {
            (Some(span_begin), Some(span_end)) => Corpus::load(
                path,
                &GridConfig {
                    span_begin,
                    span_end,
                    granularity: self.granularity(),
                },
            )?,
            (None, None) => Corpus::load_spanning(path, self.granularity())?,
            _ => return Err(Error::validation("--span-begin and --span-end must be given together")),
        };
        Ok(corpus.filter_aspects(idf_threshold))
    }
}

#[derive(Args)]
struct RetrievalArgs {
    /// Corpus file (JSON Lines).
    #[arg(long)]
    corpus: PathBuf,
    /// Aspects with normalized IDF below this are ignored.
    #[arg(long, default_value_t = DEFAULT_IDF_THRESHOLD)]
    idf_threshold: f64,
    /// Dirichlet smoothing parameter.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Number of candidates kept per query.
    #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
    top: usize,
    /// Precomputed `query_id<TAB>doc_id<TAB>score` file used instead of retrieval.
    #[arg(long)]
    scores: Option<PathBuf>,
}

impl RetrievalArgs {
    fn engine(&self, grid: &GridArgs) -> Result<Engine> {
        let corpus = grid.load(&self.corpus, self.idf_threshold)?;
        let engine = Engine::new(corpus, self.mu, self.top);
        match &self.scores {
            Some(path) => {
                let scores = load_precomputed_scores(path, engine.corpus(), self.top)?;
                Ok(engine.with_precomputed(scores))
            }
            None => Ok(engine),
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    /// Topics file (JSON) providing query ids and texts.
    #[arg(long)]
    query_file: Option<PathBuf>,
    /// Restrict to one query id from the topics file.
    #[arg(long)]
    query_id: Option<String>,
    /// Ad hoc query text, reported under id `Q`.
    #[arg(long, conflicts_with = "query_file")]
    query: Option<String>,
}

impl QueryArgs {
    /// (id, text) pairs to process.
    fn queries(&self) -> Result<Vec<(String, String)>> {
        if let Some(q) = &self.query {
            return Ok(vec![("Q".to_owned(), q.clone())]);
        }
        let Some(path) = &self.query_file else {
            return Err(Error::validation("either --query or --query-file is required"));
        };
        let topics: Vec<Topic> = load_topics(path)?;
        let selected: Vec<(String, String)> = topics
            .into_iter()
            .filter(|t| self.query_id.as_ref().is_none_or(|id| *id == t.id))
            .map(|t| (t.id, t.query))
            .collect();
        if selected.is_empty() {
            return Err(Error::validation(match &self.query_id {
                Some(id) => format!("query id {id:?} not found in {}", path.display()),
                None => format!("no topics in {}", path.display()),
            }));
        }
        Ok(selected)
    }
}

#[derive(Args)]
struct PriorArgs {
    /// Weight of the publication-date distribution in the temporal prior.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Burst detection window in intervals (defaults per granularity).
    #[arg(long)]
    burst_window: Option<usize>,
    /// Standard deviations above the window mean that make an interval bursty.
    #[arg(long, default_value_t = DEFAULT_BURST_SIGMA)]
    burst_sigma: f64,
}

impl PriorArgs {
    fn config(&self, granularity: Granularity) -> PriorConfig {
        let mut c = PriorConfig::for_granularity(granularity);
        c.theta = self.theta;
        c.burst_sigma = self.burst_sigma;
        if let Some(w) = self.burst_window {
            c.burst_window = w;
        }
        c
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreFormat {
    /// `query_id<TAB>doc_id<TAB>score`, readable by `--scores`.
    Tsv,
    /// Six-column run format.
    Run,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus and print grid and aspect statistics.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_IDF_THRESHOLD)]
        idf_threshold: f64,
        /// Write the normalized corpus (clipped references, filtered aspects) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fill in aspects and year references from raw text with a dictionary.
    Annotate {
        /// Corpus file whose records carry `text`.
        #[arg(long)]
        input: PathBuf,
        /// TSV of `surface form<TAB>aspect id`.
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieve candidates with the Dirichlet language model.
    Score {
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        queries: QueryArgs,
        #[arg(long, value_enum, default_value = "tsv")]
        format: ScoreFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute temporal, aspect and burst priors for one query.
    Priors {
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        queries: QueryArgs,
        #[command(flatten)]
        priors: PriorArgs,
        /// JSON output file (stdout when omitted).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Re-rank candidates and write a run file.
    Diversify {
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        queries: QueryArgs,
        #[command(flatten)]
        priors: PriorArgs,
        #[arg(long, default_value = "histdiv")]
        algo: Algorithm,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        w: Option<f64>,
        /// Run tag (defaults to the algorithm name).
        #[arg(long)]
        tag: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score run files against subtopic judgments.
    Evaluate {
        /// Run files; each is reported under its file stem.
        #[arg(long = "run", required = true, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        topics: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "10,15,20")]
        depths: Vec<usize>,
        /// Run name that win/loss counts compare against.
        #[arg(long)]
        baseline: Option<String>,
        /// Count any document published in a subtopic interval as time-relevant.
        #[arg(long)]
        publication_only: bool,
        /// Directory for report.tsv and summary.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated parameter tuning over the configured grids.
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Run every configured algorithm and parameter setting and evaluate it.
    Experiment {
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Serve /search and /algorithms over HTTP.
    Serve {
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Write a synthetic archive with topics and judgments.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SynthConfig::default().docs)]
        docs: usize,
        #[arg(long, default_value_t = SynthConfig::default().topics)]
        topics: usize,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the configuration and HISTDIV_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

impl ExperimentArgs {
    fn workspace(&self, grid: &GridArgs) -> Result<Workspace> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        if let Some(g) = grid.granularity {
            config.granularities = vec![g];
        }
        if grid.span_begin.is_some() {
            config.span_begin = grid.span_begin;
        }
        if grid.span_end.is_some() {
            config.span_end = grid.span_end;
        }
        Workspace::load(config)
    }
}

fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(path, body).map_err(|e| Error::io(path, e))
        }
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn candidates(engine: &Engine, id: &str, query: &str) -> Result<CandidateSet> {
    let c = engine.retrieve_topic(id, query)?;
    if c.is_empty() {
        return Err(Error::EmptyCandidates(Some(query.to_owned())));
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    let grid = cli.grid;
    match cli.command {
        Command::Ingest {
            corpus,
            idf_threshold,
            out,
        } => {
            let c = grid.load(&corpus, idf_threshold)?;
            let w = c.warnings();
            let g = c.grid();
            println!("documents\t{}", c.len());
            println!("aspects\t{}", c.aspect_count());
            println!("intervals\t{} ({} {}..{})", g.len(), g.granularity(), g.span().begin, g.span().end);
            println!("clipped_refs\t{}", w.clipped_refs);
            println!("dropped_refs\t{}", w.dropped_refs);
            if let Some(path) = out {
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                c.write_jsonl(std::io::BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
            }
        }
        Command::Annotate { input, dict, out } => {
            let dictionary = AspectDictionary::load(&dict)?;
            let mut records = read_records(&input)?;
            annotate_fallback(&mut records, &dictionary);
            let mut body = String::new();
            for r in &records {
                body.push_str(&serde_json::to_string(r).expect("records serialize"));
                body.push('\n');
            }
            write_output(Some(&out), &body)?;
            log::info!("annotated {} records", records.len());
        }
        Command::Score {
            retrieval,
            queries,
            format,
            out,
        } => {
            let engine = retrieval.engine(&grid)?;
            let mut body = String::new();
            for (id, query) in queries.queries()? {
                let c = engine.retrieve_topic(&id, &query)?;
                let corpus = engine.corpus();
                match format {
                    ScoreFormat::Tsv => {
                        for cand in c.entries() {
                            body.push_str(&format!("{id}\t{}\t{}\n", corpus.document(cand.doc).id, cand.raw));
                        }
                    }
                    ScoreFormat::Run => {
                        let entries: Vec<RunEntry> = c
                            .entries()
                            .iter()
                            .map(|cand| RunEntry {
                                doc: corpus.document(cand.doc).id.clone(),
                                score: cand.raw,
                            })
                            .collect();
                        body.push_str(&format_run(&id, &entries, "lm"));
                    }
                }
            }
            write_output(out.as_deref(), &body)?;
        }
        Command::Priors {
            retrieval,
            queries,
            priors,
            dump,
        } => {
            let engine = retrieval.engine(&grid)?;
            let list = queries.queries()?;
            let [(id, query)] = &list[..] else {
                return Err(Error::validation("priors needs exactly one query; pass --query-id"));
            };
            let c = candidates(&engine, id, query)?;
            let set = engine.priors(&c, &priors.config(grid.granularity()))?;
            let json = serde_json::to_string_pretty(&set.dump(engine.corpus())).expect("priors serialize");
            write_output(dump.as_deref(), &(json + "\n"))?;
        }
        Command::Diversify {
            retrieval,
            queries,
            priors,
            algo,
            k,
            alpha,
            beta,
            lambda,
            w,
            tag,
            out,
        } => {
            let engine = retrieval.engine(&grid)?;
            let mut d = DiversifyConfig::new(algo, k);
            d.alpha = alpha.unwrap_or(Param::Alpha.range().2);
            d.beta = beta.unwrap_or(Param::Beta.range().2);
            d.lambda = lambda.unwrap_or(Param::Lambda.range().2);
            d.w = w.unwrap_or(Param::W.range().2);
            d.validate()?;
            let prior_config = priors.config(grid.granularity());
            let tag = tag.unwrap_or_else(|| algo.to_string());
            let corpus = engine.corpus();
            let mut body = String::new();
            for (id, query) in queries.queries()? {
                let c = match candidates(&engine, &id, &query) {
                    Ok(c) => c,
                    Err(e @ Error::EmptyCandidates(_)) => {
                        log::warn!("{id}: {e}; skipped");
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let set = engine.priors(&c, &prior_config)?;
                let ranking = engine.rerank(&c, &set, &d)?;
                let entries: Vec<RunEntry> = ranking
                    .steps
                    .iter()
                    .map(|s| RunEntry {
                        doc: corpus.document(s.doc).id.clone(),
                        score: s.gain,
                    })
                    .collect();
                body.push_str(&format_run(&id, &entries, &tag));
            }
            write_output(out.as_deref(), &body)?;
        }
        Command::Evaluate {
            runs,
            corpus,
            topics,
            qrels,
            depths,
            baseline,
            publication_only,
            out,
        } => {
            if depths.is_empty() || depths.contains(&0) {
                return Err(Error::validation("depths must be at least 1"));
            }
            let c = grid.load(&corpus, 0.0)?;
            let topics = load_topics(&topics)?;
            let judgments = load_qrels(&qrels)?;
            judgments.validate(&topics)?;
            let relevance = if publication_only {
                TimeRelevance::PublicationOnly
            } else {
                TimeRelevance::JudgedRelevant
            };
            let mut report = MetricReport::default();
            for path in &runs {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .ok_or_else(|| Error::validation(format!("bad run path {}", path.display())))?;
                let run = load_run(path)?;
                for topic in &topics {
                    let docs: Vec<String> = run
                        .get(&topic.id)
                        .map(|entries| entries.iter().map(|e| e.doc.clone()).collect())
                        .unwrap_or_default();
                    let spaces = build_spaces(topic, &judgments, &c, relevance)?;
                    report.rows.extend(evaluate_topic(&name, &topic.id, &docs, &spaces, &depths));
                }
            }
            report.sort();
            let baseline = baseline.unwrap_or_else(|| report.runs().into_iter().next().unwrap_or_default().to_owned());
            let summary = report.summary(Metric::Sbr, &baseline);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                    write_output(Some(&dir.join("report.tsv")), &report.to_tsv())?;
                    write_output(Some(&dir.join("summary.txt")), &summary)?;
                }
                None => print!("{summary}"),
            }
        }
        Command::Sweep { experiment } => {
            let ws = experiment.workspace(&grid)?;
            let result = sweep(&ws)?;
            let dir = ws.config.output.clone();
            result.experiment.write(&dir, ws.config.baseline)?;
            let path = result.write(&dir)?;
            print!("{}", result.to_tsv());
            log::info!("wrote {}", path.display());
        }
        Command::Experiment { experiment } => {
            let ws = experiment.workspace(&grid)?;
            let result = run_experiment(&ws)?;
            let written = result.write(&ws.config.output, ws.config.baseline)?;
            for e in &result.report.errors {
                log::warn!("{} / {}: {}", e.run, e.topic, e.message);
            }
            print!("{}", result.summary(ws.config.baseline));
            log::info!("wrote {} files below {}", written.len(), ws.config.output.display());
        }
        Command::Serve { retrieval, port, host } => {
            let engine = retrieval.engine(&grid)?;
            let state = histdiv_service::AppState::new(engine)?;
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Error::validation(format!("bad listen address {host}:{port}: {e}")))?;
            histdiv_service::run(addr, state).map_err(|e| Error::io(addr.to_string(), e))?;
        }
        Command::Synth {
            out,
            seed,
            docs,
            topics,
        } => {
            let config = SynthConfig {
                seed,
                docs,
                topics,
                ..SynthConfig::default()
            };
            generate(&config)?.write(&out)?;
            log::info!("wrote synthetic archive to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
