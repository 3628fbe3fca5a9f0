//! End-to-end experiments: retrieval, priors, re-ranking and evaluation
//! over a judged topic set, plus parameter sweeps and a fallback annotator.

mod annotate;
mod config;
mod engine;
mod experiment;

pub use annotate::{annotate_fallback, year_references, AspectDictionary};
pub use config::{ExperimentConfig, ParamGrid, DEFAULT_IDF_THRESHOLD, WORKERS_ENV};
pub use engine::{Engine, SearchOutcome};
pub use experiment::{
    expand_specs, run_experiment, sweep, ExperimentOutput, RunRecord, RunSpec, SweepEntry, SweepOutput, Workspace,
};
