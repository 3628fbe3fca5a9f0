//! Query-specific priors estimated from the candidate set: where in time
//! the query matters, which aspects matter when, and where the bursts are.

mod bursts;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::corpus::{project_reference, AspectId, Corpus, Granularity};
use crate::error::{Error, Result};
use crate::relevance::CandidateSet;

pub use bursts::{detect_bursts, BurstSet, Segment};

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_BURST_SIGMA: f64 = 1.0;

/// Default burst window: 24 months, or 5 years at yearly granularity.
///
/// Two yearly intervals would be the literal conversion, but over a
/// two-value window the larger count always equals mean plus standard
/// deviation, so nothing could ever be bursty.
pub fn default_burst_window(granularity: Granularity) -> usize {
    match granularity {
        Granularity::Month => 24,
        Granularity::Year => 5,
    }
}

/// Reference-date distribution; `degenerate` is set when no candidate
/// carried any usable temporal reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefDistribution {
    pub probs: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalPrior {
    pub probs: Vec<f64>,
    pub theta: f64,
}

impl TemporalPrior {
    pub fn get(&self, interval: usize) -> f64 {
        self.probs[interval]
    }
}

/// Share of candidates published in each interval.
pub fn pub_distribution(candidates: &CandidateSet, corpus: &Corpus) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates(None));
    }
    let counts = interval_counts(candidates, corpus);
    let n = candidates.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Candidate counts per grid interval.
pub fn interval_counts(candidates: &CandidateSet, corpus: &Corpus) -> Vec<usize> {
    let mut counts = vec![0usize; corpus.grid().len()];
    for doc in candidates.docs() {
        counts[corpus.interval_of_doc(doc)] += 1;
    }
    counts
}

/// Normalized mass of the candidates' temporal references.
pub fn ref_distribution(candidates: &CandidateSet, corpus: &Corpus) -> RefDistribution {
    let grid = corpus.grid();
    let mut mass = vec![0.0; grid.len()];
    for doc in candidates.docs() {
        for r in &corpus.document(doc).temporal_refs {
            for (i, m) in project_reference(r, grid) {
                mass[i] += m;
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        for m in &mut mass {
            *m /= total;
        }
        RefDistribution {
            probs: mass,
            degenerate: false,
        }
    } else {
        RefDistribution {
            probs: mass,
            degenerate: true,
        }
    }
}

/// `theta * P_pub + (1 - theta) * P_ref`, or `P_pub` alone when the reference
/// distribution is degenerate.
pub fn temporal_prior(p_pub: &[f64], p_ref: &RefDistribution, theta: f64) -> Result<TemporalPrior> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::validation(format!("theta must lie in [0, 1], got {theta}")));
    }
    if p_pub.len() != p_ref.probs.len() {
        return Err(Error::validation(format!(
            "distribution lengths differ: {} vs {}",
            p_pub.len(),
            p_ref.probs.len()
        )));
    }
    let probs = if p_ref.degenerate {
        p_pub.to_vec()
    } else {
        p_pub
            .iter()
            .zip(&p_ref.probs)
            .map(|(p, r)| theta * p + (1.0 - theta) * r)
            .collect()
    };
    Ok(TemporalPrior { probs, theta })
}

/// Time-conditioned and static aspect priors over the candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectPrior {
    per_interval: HashMap<(AspectId, usize), f64>,
    static_prior: HashMap<AspectId, f64>,
}

impl AspectPrior {
    /// `P(a | q, interval)`; zero where the aspect does not occur.
    pub fn get(&self, aspect: AspectId, interval: usize) -> f64 {
        self.per_interval.get(&(aspect, interval)).copied().unwrap_or(0.0)
    }

    /// `P(a | q)`: share of all candidates carrying the aspect.
    pub fn static_prior(&self, aspect: AspectId) -> f64 {
        self.static_prior.get(&aspect).copied().unwrap_or(0.0)
    }

    /// Non-zero `(aspect, interval)` cells.
    pub fn cells(&self) -> impl Iterator<Item = (AspectId, usize, f64)> + '_ {
        self.per_interval.iter().map(|(&(a, i), &p)| (a, i, p))
    }
}

pub fn aspect_prior(candidates: &CandidateSet, corpus: &Corpus) -> Result<AspectPrior> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates(None));
    }
    let counts = interval_counts(candidates, corpus);
    let mut cell_counts: HashMap<(AspectId, usize), usize> = HashMap::new();
    let mut aspect_counts: HashMap<AspectId, usize> = HashMap::new();
    for doc in candidates.docs() {
        let interval = corpus.interval_of_doc(doc);
        for &a in &corpus.document(doc).aspects {
            *cell_counts.entry((a, interval)).or_default() += 1;
            *aspect_counts.entry(a).or_default() += 1;
        }
    }
    let n = candidates.len() as f64;
    Ok(AspectPrior {
        per_interval: cell_counts
            .into_iter()
            .map(|((a, i), c)| ((a, i), c as f64 / counts[i] as f64))
            .collect(),
        static_prior: aspect_counts
            .into_iter()
            .map(|(a, c)| (a, c as f64 / n))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorConfig {
    pub theta: f64,
    pub burst_window: usize,
    pub burst_sigma: f64,
}

impl PriorConfig {
    pub fn for_granularity(granularity: Granularity) -> PriorConfig {
        PriorConfig {
            theta: DEFAULT_THETA,
            burst_window: default_burst_window(granularity),
            burst_sigma: DEFAULT_BURST_SIGMA,
        }
    }
}

/// Everything the re-rankers need to know about one query.
#[derive(Debug, Clone)]
pub struct PriorSet {
    pub temporal: TemporalPrior,
    pub publication: Vec<f64>,
    pub reference: RefDistribution,
    pub aspect: AspectPrior,
    pub bursts: BurstSet,
    /// Candidate publication counts per interval.
    pub counts: Vec<usize>,
}

impl PriorSet {
    pub fn build(candidates: &CandidateSet, corpus: &Corpus, config: &PriorConfig) -> Result<PriorSet> {
        let publication = pub_distribution(candidates, corpus)?;
        let reference = ref_distribution(candidates, corpus);
        if reference.degenerate {
            log::debug!("no temporal references among candidates; using publication prior");
        }
        let temporal = temporal_prior(&publication, &reference, config.theta)?;
        let aspect = aspect_prior(candidates, corpus)?;
        let counts = interval_counts(candidates, corpus);
        let bursts = detect_bursts(&counts, config.burst_window, config.burst_sigma)?;
        Ok(PriorSet {
            temporal,
            publication,
            reference,
            aspect,
            bursts,
            counts,
        })
    }

    /// JSON-friendly view with interval labels and aspect names.
    pub fn dump(&self, corpus: &Corpus) -> PriorDump {
        let grid = corpus.grid();
        let mut aspects: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (a, i, p) in self.aspect.cells() {
            aspects
                .entry(corpus.aspect_name(a).to_owned())
                .or_default()
                .insert(grid.label(i), p);
        }
        let static_aspects = aspects
            .keys()
            .map(|name| {
                let id = corpus.aspect_id(name).expect("aspect from corpus");
                (name.clone(), self.aspect.static_prior(id))
            })
            .collect();
        PriorDump {
            granularity: grid.granularity(),
            intervals: (0..grid.len()).map(|i| grid.label(i)).collect(),
            counts: self.counts.clone(),
            publication: self.publication.clone(),
            reference: self.reference.probs.clone(),
            reference_degenerate: self.reference.degenerate,
            theta: self.temporal.theta,
            temporal: self.temporal.probs.clone(),
            aspects,
            static_aspects,
            bursts: self.bursts.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PriorDump {
    pub granularity: Granularity,
    pub intervals: Vec<String>,
    pub counts: Vec<usize>,
    pub publication: Vec<f64>,
    pub reference: Vec<f64>,
    pub reference_degenerate: bool,
    pub theta: f64,
    pub temporal: Vec<f64>,
    pub aspects: BTreeMap<String, BTreeMap<String, f64>>,
    pub static_aspects: BTreeMap<String, f64>,
    pub bursts: BurstSet,
}
