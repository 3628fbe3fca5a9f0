use std::collections::BTreeMap;
use std::sync::Arc;

use crate::corpus::{Corpus, Granularity, TemporalGrid};
use crate::diversify::{diversify, DiversifyConfig, RankedList};
use crate::error::{Error, Result};
use crate::priors::{PriorConfig, PriorSet};
use crate::relevance::{score_lm_dirichlet, tokenize, CandidateSet, InvertedIndex};

/// A loaded corpus with its index: the full per-query pipeline.
#[derive(Debug, Clone)]
pub struct Engine {
    corpus: Corpus,
    index: Arc<InvertedIndex>,
    mu: f64,
    limit: usize,
    precomputed: Option<BTreeMap<String, CandidateSet>>,
}

/// Everything one query produced.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub candidates: CandidateSet,
    pub priors: PriorSet,
    pub ranking: RankedList,
}

impl Engine {
    pub fn new(corpus: Corpus, mu: f64, limit: usize) -> Engine {
        let index = Arc::new(InvertedIndex::build(&corpus));
        Engine {
            corpus,
            index,
            mu,
            limit,
            precomputed: None,
        }
    }

    /// Serve candidate sets from precomputed scores keyed by query id.
    pub fn with_precomputed(mut self, scores: BTreeMap<String, CandidateSet>) -> Engine {
        self.precomputed = Some(scores);
        self
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// The same collection over another grid; the index is shared.
    pub fn regrid(&self, grid: TemporalGrid) -> Result<Engine> {
        Ok(Engine {
            corpus: self.corpus.regrid(grid)?,
            ..self.clone()
        })
    }

    /// Same span, different granularity.
    pub fn with_granularity(&self, granularity: Granularity) -> Result<Engine> {
        if self.corpus.grid().granularity() == granularity {
            return Ok(self.clone());
        }
        let span = self.corpus.grid().span();
        self.regrid(TemporalGrid::build(span.begin, span.end, granularity)?)
    }

    /// Dirichlet-smoothed retrieval of the top candidates for free text.
    pub fn retrieve(&self, query: &str) -> Result<CandidateSet> {
        let terms = tokenize(query);
        if terms.is_empty() {
            return Err(Error::validation(format!("query {query:?} has no terms")));
        }
        score_lm_dirichlet(&self.index, &terms, self.mu, self.limit)
    }

    /// Candidates for a judged topic: precomputed scores when loaded,
    /// retrieval otherwise.
    pub fn retrieve_topic(&self, topic_id: &str, query: &str) -> Result<CandidateSet> {
        match &self.precomputed {
            Some(scores) => scores
                .get(topic_id)
                .cloned()
                .ok_or_else(|| Error::EmptyCandidates(Some(topic_id.to_owned()))),
            None => self.retrieve(query),
        }
    }

    pub fn priors(&self, candidates: &CandidateSet, config: &PriorConfig) -> Result<PriorSet> {
        PriorSet::build(candidates, &self.corpus, config)
    }

    pub fn rerank(&self, candidates: &CandidateSet, priors: &PriorSet, config: &DiversifyConfig) -> Result<RankedList> {
        diversify(candidates, priors, &self.corpus, config)
    }

    /// Retrieve, estimate priors and re-rank.
    pub fn search(&self, query: &str, diversify: &DiversifyConfig, priors: &PriorConfig) -> Result<SearchOutcome> {
        let candidates = self.retrieve(query)?;
        if candidates.is_empty() {
            return Err(Error::EmptyCandidates(Some(query.to_owned())));
        }
        let priors = self.priors(&candidates, priors)?;
        let ranking = self.rerank(&candidates, &priors, diversify)?;
        Ok(SearchOutcome {
            candidates,
            priors,
            ranking,
        })
    }
}
