//! Temporal search result diversification for news archives.
//!
//! The crate re-ranks archive search results so that the top of the ranking
//! covers the important aspects of a query *and* the time periods in which
//! each of them mattered. The pipeline is:
//!
//! 1. [`corpus`]: load annotated documents and discretize time.
//! 2. [`relevance`]: retrieve an initial ranking with a Dirichlet-smoothed
//!    query likelihood model.
//! 3. [`priors`]: estimate temporal and aspect priors and bursts from it.
//! 4. [`diversify`]: greedily re-rank (HistDiv, HistDiv-Burst, baselines).
//! 5. [`metrics`]: judge the result in aspect, time and aspect-time space.
//!
//! [`harness`] ties the steps together for experiments and parameter sweeps.

pub mod corpus;
pub mod diversify;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod priors;
pub mod relevance;
pub mod synth;

pub use corpus::{AspectId, Corpus, Document, Granularity, GridConfig, TemporalGrid, TimeInterval};
pub use diversify::{diversify, Algorithm, DiversifyConfig, RankedList};
pub use error::{Error, Result};
pub use metrics::{IntentSpace, Judgments, SpaceKind, Topic};
pub use priors::{PriorConfig, PriorSet};
pub use relevance::{CandidateSet, InvertedIndex};
