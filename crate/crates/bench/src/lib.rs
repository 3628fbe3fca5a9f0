//! Shared fixtures for the benchmarks.

use histdiv_core::harness::Engine;
use histdiv_core::relevance::CandidateSet;
use histdiv_core::synth::{generate, SynthConfig};
use histdiv_core::Granularity;
use histdiv_core::corpus::Corpus;

pub const QUERY: &str = "topic01";

/// One synthetic topic over `docs` documents, month grid, aspects filtered.
pub fn engine(docs: usize) -> Engine {
    let config = SynthConfig {
        docs,
        topics: 1,
        ..SynthConfig::default()
    };
    let archive = generate(&config).expect("synthetic archive");
    let grid = config.grid_config(Granularity::Month).build().expect("grid");
    let corpus = Corpus::from_records(archive.records, grid)
        .expect("corpus")
        .filter_aspects(0.2);
    Engine::new(corpus, 1000.0, 1000)
}

/// The engine plus the full candidate set of [`QUERY`].
pub fn candidates(docs: usize) -> (Engine, CandidateSet) {
    let engine = engine(docs);
    let candidates = engine.retrieve(QUERY).expect("retrieval");
    (engine, candidates)
}
