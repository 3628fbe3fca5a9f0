use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

use super::{Judgments, Topic};

/// The three ground-truth views of a topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Subtopics.
    A,
    /// Grid partitions of the qualifying intervals.
    T,
    /// `(subtopic, qualifying interval)` pairs.
    AT,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 3] = [SpaceKind::A, SpaceKind::T, SpaceKind::AT];

    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::A => "A",
            SpaceKind::T => "T",
            SpaceKind::AT => "AT",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(SpaceKind::A),
            "T" | "t" => Ok(SpaceKind::T),
            "AT" | "at" => Ok(SpaceKind::AT),
            other => Err(Error::validation(format!("unknown space {other:?}"))),
        }
    }
}

/// When a document counts as relevant to a time partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeRelevance {
    /// Published in the partition and judged relevant to some subtopic.
    #[default]
    JudgedRelevant,
    /// Published in the partition, judgments ignored.
    PublicationOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intent {
    pub key: String,
    pub weight: f64,
    pub relevant: HashSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentSpace {
    pub kind: SpaceKind,
    pub intents: Vec<Intent>,
}

impl IntentSpace {
    /// A space with equal weights over `intents`.
    pub fn uniform(kind: SpaceKind, intents: Vec<(String, HashSet<String>)>) -> IntentSpace {
        let w = 1.0 / intents.len() as f64;
        IntentSpace {
            kind,
            intents: intents
                .into_iter()
                .map(|(key, relevant)| Intent {
                    key,
                    weight: w,
                    relevant,
                })
                .collect(),
        }
    }

    /// Whether metrics are defined: at least one intent with a relevant document.
    pub fn is_evaluable(&self) -> bool {
        self.intents.iter().any(|i| !i.relevant.is_empty())
    }

    /// Documents relevant to at least one intent.
    pub fn relevant_pool(&self) -> BTreeSet<&str> {
        self.intents
            .iter()
            .flat_map(|i| i.relevant.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spaces {
    pub a: IntentSpace,
    pub t: IntentSpace,
    pub at: IntentSpace,
}

impl Spaces {
    pub fn get(&self, kind: SpaceKind) -> &IntentSpace {
        match kind {
            SpaceKind::A => &self.a,
            SpaceKind::T => &self.t,
            SpaceKind::AT => &self.at,
        }
    }
}

/// Build the aspect, time and aspect-time intent spaces of a topic over the
/// corpus grid.
pub fn build_spaces(
    topic: &Topic,
    judgments: &Judgments,
    corpus: &Corpus,
    time_relevance: TimeRelevance,
) -> Result<Spaces> {
    topic.validate(None)?;
    let grid = corpus.grid();
    let interval_of = |doc: &str| corpus.index_of(doc).map(|i| corpus.interval_of_doc(i));
    let published = |doc: &str| corpus.index_of(doc).map(|i| corpus.document(i).published);

    let a = IntentSpace::uniform(
        SpaceKind::A,
        topic
            .subtopics
            .iter()
            .map(|s| {
                let rel = judgments.relevant(&topic.id, &s.id).map(str::to_owned).collect();
                (s.id.clone(), rel)
            })
            .collect(),
    );

    let cells: BTreeSet<usize> = topic
        .subtopics
        .iter()
        .flat_map(|s| &s.intervals)
        .flat_map(|iv| grid.overlapping(iv))
        .collect();
    let topic_relevant = judgments.relevant_to_topic(&topic.id);
    let t = IntentSpace::uniform(
        SpaceKind::T,
        cells
            .into_iter()
            .map(|cell| {
                let rel: HashSet<String> = match time_relevance {
                    TimeRelevance::JudgedRelevant => topic_relevant
                        .iter()
                        .filter(|d| interval_of(d) == Some(cell))
                        .map(|d| d.to_string())
                        .collect(),
                    TimeRelevance::PublicationOnly => corpus
                        .documents()
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| corpus.interval_of_doc(*i) == cell)
                        .map(|(_, d)| d.id.clone())
                        .collect(),
                };
                (grid.label(cell), rel)
            })
            .collect(),
    );

    let n_sub = topic.subtopics.len() as f64;
    let mut at_intents = Vec::new();
    for s in &topic.subtopics {
        let n_iv = s.intervals.len() as f64;
        for (idx, iv) in s.intervals.iter().enumerate() {
            let relevant = judgments
                .relevant(&topic.id, &s.id)
                .filter(|d| published(d).is_some_and(|p| iv.contains(p)))
                .map(str::to_owned)
                .collect();
            at_intents.push(Intent {
                key: format!("{}#{idx}:{}..{}", s.id, iv.begin, iv.end),
                weight: 1.0 / n_sub / n_iv,
                relevant,
            });
        }
    }
    let at = IntentSpace {
        kind: SpaceKind::AT,
        intents: at_intents,
    };
    Ok(Spaces { a, t, at })
}
