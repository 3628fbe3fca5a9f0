//! Greedy re-rankers: HistDiv, its burst-aware variant and the baselines it
//! is compared against. Every algorithm takes the same inputs (a candidate
//! set plus the query priors) and produces a [`RankedList`].

mod baselines;
mod histdiv;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AspectId, Corpus};
use crate::error::{Error, Result};
use crate::priors::PriorSet;
use crate::relevance::CandidateSet;

pub use baselines::{eqt, ia_select, lm, mdiv, onlytime, pm2, AspectSpace};
pub use histdiv::{
    burst_window, decay_factor, histdiv, histdiv_burst, trace_states, u_aspect, u_time,
    UtilityState,
};

/// All implemented re-ranking algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, )]
pub enum Algorithm {
    Lm,
    IaSelect,
    Pm2,
    TIaSelect,
    TPm2,
    EIaSelect,
    EPm2,
    Mdiv,
    OnlyTime,
    Eqt,
    HistDiv,
    HistDivBurst,
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::Lm,
        Algorithm::IaSelect,
        Algorithm::Pm2,
        Algorithm::TIaSelect,
        Algorithm::TPm2,
        Algorithm::EIaSelect,
        Algorithm::EPm2,
        Algorithm::Mdiv,
        Algorithm::OnlyTime,
        Algorithm::Eqt,
        Algorithm::HistDiv,
        Algorithm::HistDivBurst,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Lm => "lm",
            Algorithm::IaSelect => "ia-select",
            Algorithm::Pm2 => "pm2",
            Algorithm::TIaSelect => "t-ia-select",
            Algorithm::TPm2 => "t-pm2",
            Algorithm::EIaSelect => "e-ia-select",
            Algorithm::EPm2 => "e-pm2",
            Algorithm::Mdiv => "mdiv",
            Algorithm::OnlyTime => "onlytime",
            Algorithm::Eqt => "eqt",
            Algorithm::HistDiv => "histdiv",
            Algorithm::HistDivBurst => "histdiv-burst",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|a| a.as_str()).collect()
    }

    /// Tunable parameters this algorithm reads.
    pub fn params(self) -> &'static [Param] {
        use Param::*;
        match self {
            Algorithm::Lm => &[],
            Algorithm::IaSelect | Algorithm::TIaSelect | Algorithm::EIaSelect => &[],
            Algorithm::Pm2 | Algorithm::TPm2 | Algorithm::EPm2 => &[Lambda],
            Algorithm::Mdiv => &[Lambda],
            Algorithm::OnlyTime => &[Alpha, Theta, W],
            Algorithm::Eqt => &[Alpha],
            Algorithm::HistDiv => &[Alpha, Beta, Theta, W],
            Algorithm::HistDivBurst => &[Alpha, Beta, Theta, BurstWindow, BurstSigma],
        }
    }

    /// Whether the algorithm has a relevance weight that reduces it to the
    /// relevance order when set to 1.
    pub fn has_relevance_weight(self) -> bool {
        matches!(
            self,
            Algorithm::HistDiv
                | Algorithm::HistDivBurst
                | Algorithm::OnlyTime
                | Algorithm::Eqt
                | Algorithm::Mdiv
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAlgorithm {
                name: s.to_owned(),
                valid: Algorithm::names(),
            })
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// A tunable parameter and its admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Param {
    Alpha,
    Beta,
    Lambda,
    Theta,
    W,
    BurstWindow,
    BurstSigma,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Lambda => "lambda",
            Param::Theta => "theta",
            Param::W => "w",
            Param::BurstWindow => "burst_window",
            Param::BurstSigma => "burst_sigma",
        }
    }

    /// `(min, max, default)`; `max` is infinite for unbounded parameters.
    pub fn range(self) -> (f64, f64, f64) {
        match self {
            Param::Alpha | Param::Beta | Param::Lambda | Param::Theta => (0.0, 1.0, 0.5),
            Param::W => (1.0, f64::INFINITY, DEFAULT_W),
            Param::BurstWindow => (2.0, f64::INFINITY, 24.0),
            Param::BurstSigma => (0.0, f64::INFINITY, 1.0),
        }
    }
}

pub const DEFAULT_W: f64 = 1.0;

/// Which selected documents discount an `(aspect, interval)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayScope {
    /// Only selected documents that carry the aspect.
    #[default]
    AspectCarriers,
    /// Every selected document, whatever its aspects.
    AllSelected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversifyConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Relevance weight of PM2 and MDiv.
    pub lambda: f64,
    /// Decay window in elementary intervals.
    pub w: f64,
    pub decay_scope: DecayScope,
}

impl DiversifyConfig {
    pub fn new(algorithm: Algorithm, k: usize) -> DiversifyConfig {
        DiversifyConfig {
            algorithm,
            k,
            alpha: 0.5,
            beta: 0.5,
            lambda: 0.5,
            w: DEFAULT_W,
            decay_scope: DecayScope::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("lambda", self.lambda)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.w.is_nan() || self.w < 1.0 {
            return Err(Error::validation(format!("w must be at least 1, got {}", self.w)));
        }
        Ok(())
    }

    /// Stable textual identity of the run configuration.
    pub fn fingerprint(&self) -> String {
        let mut parts = vec![format!("k={}", self.k)];
        for p in self.algorithm.params() {
            match p {
                Param::Alpha => parts.push(format!("alpha={}", self.alpha)),
                Param::Beta => parts.push(format!("beta={}", self.beta)),
                Param::Lambda => parts.push(format!("lambda={}", self.lambda)),
                Param::W => parts.push(format!("w={}", self.w)),
                _ => {}
            }
        }
        if self.decay_scope == DecayScope::AllSelected {
            parts.push("decay=all".into());
        }
        format!("{}:{}", self.algorithm, parts.join(","))
    }
}

/// One greedy step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub doc: usize,
    /// Objective value of the chosen document when it was selected.
    pub gain: f64,
    /// Relevance `V(d|q)` of the chosen document.
    pub relevance: f64,
    /// Summed aspect utility (or aspect-space score for the baselines).
    pub aspect_utility: f64,
    pub time_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub algorithm: Algorithm,
    pub fingerprint: String,
    pub steps: Vec<Step>,
}

impl RankedList {
    pub fn docs(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.doc)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Sum of the per-step gains.
    pub fn objective(&self) -> f64 {
        self.steps.iter().map(|s| s.gain).sum()
    }
}

/// Run any algorithm by name.
pub fn diversify(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    match config.algorithm {
        Algorithm::HistDiv => histdiv(candidates, priors, corpus, config),
        Algorithm::HistDivBurst => histdiv_burst(candidates, priors, corpus, config),
        _ => diversify_baseline(candidates, priors, corpus, config),
    }
}

/// Run one of the baselines (anything but the two HistDiv variants).
pub fn diversify_baseline(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    match config.algorithm {
        Algorithm::Lm => lm(candidates, config),
        Algorithm::IaSelect => ia_select(candidates, corpus, AspectSpace::Plain, config),
        Algorithm::TIaSelect => ia_select(candidates, corpus, AspectSpace::Linearized, config),
        Algorithm::EIaSelect => ia_select(candidates, corpus, AspectSpace::Enriched, config),
        Algorithm::Pm2 => pm2(candidates, corpus, AspectSpace::Plain, config),
        Algorithm::TPm2 => pm2(candidates, corpus, AspectSpace::Linearized, config),
        Algorithm::EPm2 => pm2(candidates, corpus, AspectSpace::Enriched, config),
        Algorithm::Mdiv => mdiv(candidates, corpus, config),
        Algorithm::OnlyTime => onlytime(candidates, priors, corpus, config),
        Algorithm::Eqt => eqt(candidates, corpus, config),
        other => Err(Error::validation(format!("{other} is not a baseline"))),
    }
}

/// Candidate state shared by the greedy loops.
#[derive(Debug, Clone)]
pub(crate) struct Item<'a> {
    pub doc: usize,
    pub relevance: f64,
    pub interval: usize,
    pub aspects: &'a [AspectId],
}

pub(crate) fn items<'a>(candidates: &CandidateSet, corpus: &'a Corpus) -> Vec<Item<'a>> {
    candidates
        .entries()
        .iter()
        .map(|c| Item {
            doc: c.doc,
            relevance: c.score,
            interval: corpus.interval_of_doc(c.doc),
            aspects: &corpus.document(c.doc).aspects,
        })
        .collect()
}

/// Validates the configuration and returns the effective depth.
pub(crate) fn prepare(candidates: &CandidateSet, config: &DiversifyConfig) -> Result<usize> {
    config.validate()?;
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates(None));
    }
    if config.k > candidates.len() {
        log::warn!(
            "k = {} exceeds the {} candidates; returning all of them",
            config.k,
            candidates.len()
        );
    }
    Ok(config.k.min(candidates.len()))
}

/// Index of the best available item: highest score, then highest relevance,
/// then lowest document index (= ascending document id).
pub(crate) fn argmax(items: &[Item<'_>], taken: &[bool], score: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, item) in items.iter().enumerate() {
        if taken[i] {
            continue;
        }
        let g = score(i);
        let better = match best {
            None => true,
            Some((b, bg)) => {
                g > bg
                    || (g == bg
                        && (item.relevance > items[b].relevance
                            || (item.relevance == items[b].relevance && item.doc < items[b].doc)))
            }
        };
        if better {
            best = Some((i, g));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        let json = serde_json::to_string(&Algorithm::ALL).unwrap();
        assert!(json.contains("\"histdiv-burst\"") && json.contains("\"onlytime\""));
        assert_eq!(serde_json::from_str::<Vec<Algorithm>>(&json).unwrap(), Algorithm::ALL);
        let err = "xquad".parse::<Algorithm>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("histdiv-burst") && msg.contains("lm"), "{msg}");
    }

    #[test]
    fn config_validation() {
        let mut c = DiversifyConfig::new(Algorithm::HistDiv, 10);
        assert!(c.validate().is_ok());
        c.k = 0;
        assert!(c.validate().is_err());
        c.k = 1;
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        c.alpha = 0.5;
        c.w = 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn fingerprint_lists_relevant_params() {
        let c = DiversifyConfig::new(Algorithm::HistDiv, 20);
        assert_eq!(c.fingerprint(), "histdiv:k=20,alpha=0.5,beta=0.5,w=1");
        assert_eq!(DiversifyConfig::new(Algorithm::Lm, 5).fingerprint(), "lm:k=5");
    }
}
