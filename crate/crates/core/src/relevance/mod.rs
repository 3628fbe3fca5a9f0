//! Initial relevance ranking: query likelihood with Dirichlet smoothing over
//! an in-memory inverted index, or externally supplied scores.

mod index;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub use index::{tokenize, InvertedIndex, Postings};

/// Number of candidates handed to the re-rankers by default.
pub const DEFAULT_CANDIDATES: usize = 1000;
/// Dirichlet smoothing mass.
pub const DEFAULT_MU: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    /// Corpus document index.
    pub doc: usize,
    pub raw: f64,
    /// Min-max normalized relevance in `[0, 1]`.
    pub score: f64,
}

/// The retrieved set for one query, ordered by raw score (descending) with
/// ties broken by ascending document id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub query: Vec<String>,
    entries: Vec<Candidate>,
    limit: usize,
}

impl CandidateSet {
    /// Rank `(doc, raw score)` pairs, keep the first `limit`, normalize.
    pub fn from_scores(query: Vec<String>, scores: Vec<(usize, f64)>, limit: usize) -> CandidateSet {
        let mut entries: Vec<Candidate> = scores
            .into_iter()
            .map(|(doc, raw)| Candidate { doc, raw, score: 0.0 })
            .collect();
        entries.sort_by(|a, b| b.raw.total_cmp(&a.raw).then(a.doc.cmp(&b.doc)));
        let mut set = CandidateSet {
            query,
            entries,
            limit,
        };
        set.truncate(limit);
        set
    }

    fn truncate(&mut self, n: usize) {
        self.entries.truncate(n);
        self.limit = n;
        let (lo, hi) = self
            .entries
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c.raw), hi.max(c.raw))
            });
        let range = hi - lo;
        for c in &mut self.entries {
            c.score = if range > 0.0 { (c.raw - lo) / range } else { 1.0 };
        }
    }

    /// The first `n` entries, renormalized over the retained set.
    pub fn top_k(&self, n: usize) -> CandidateSet {
        let mut out = self.clone();
        out.truncate(n.max(1));
        out
    }

    pub fn entries(&self) -> &[Candidate] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn docs(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|c| c.doc)
    }
}

/// Query likelihood with Dirichlet smoothing (natural log).
///
/// Documents sharing no term with the query are not retrieved; query terms
/// absent from the collection are ignored.
pub fn score_lm_dirichlet(
    index: &InvertedIndex,
    query: &[String],
    mu: f64,
    top: usize,
) -> Result<CandidateSet> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::validation(format!("mu must be positive, got {mu}")));
    }
    if query.is_empty() {
        return Err(Error::validation("query has no terms"));
    }
    if top == 0 {
        return Err(Error::validation("candidate limit must be at least 1"));
    }
    let collection_len = index.collection_len() as f64;
    let known: Vec<&Postings> = query.iter().filter_map(|t| index.postings(t)).collect();

    let mut docs: Vec<u32> = known
        .iter()
        .flat_map(|p| p.docs.iter().map(|e| e.0))
        .collect();
    docs.sort_unstable();
    docs.dedup();

    let scores = docs
        .into_iter()
        .map(|doc| {
            let len = index.doc_len(doc as usize) as f64;
            let score: f64 = known
                .iter()
                .map(|p| {
                    let background = p.cf as f64 / collection_len;
                    ((p.tf(doc) as f64 + mu * background) / (len + mu)).ln()
                })
                .sum();
            (doc as usize, score)
        })
        .collect();
    Ok(CandidateSet::from_scores(query.to_vec(), scores, top))
}

/// Read `query_id<TAB>doc_id<TAB>score` rows, one candidate set per query.
pub fn load_precomputed_scores(
    path: impl AsRef<Path>,
    corpus: &Corpus,
    top: usize,
) -> Result<BTreeMap<String, CandidateSet>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut by_query: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [query, doc_id, score] = fields[..] else {
            return Err(parse_err(format!("expected 3 tab-separated fields, got {}", fields.len())));
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad score {score:?}: {e}")))?;
        let doc = corpus
            .index_of(doc_id)
            .ok_or_else(|| Error::validation(format!("unknown document id {doc_id:?} on line {}", i + 1)))?;
        by_query.entry(query.to_owned()).or_default().push((doc, score));
    }
    Ok(by_query
        .into_iter()
        .map(|(q, scores)| (q, CandidateSet::from_scores(Vec::new(), scores, top)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocumentRecord, Granularity, TemporalGrid};
    use std::io::Write;

    fn corpus(texts: &[&str]) -> Corpus {
        let grid = TemporalGrid::build(
            "2000-01-01".parse().unwrap(),
            "2000-12-31".parse().unwrap(),
            Granularity::Month,
        )
        .unwrap();
        let records = texts
            .iter()
            .enumerate()
            .map(|(i, t)| DocumentRecord {
                id: format!("d{i}"),
                published: "2000-01-01".parse().unwrap(),
                aspects: vec![],
                temporal_refs: vec![],
                text: Some(t.to_string()),
            })
            .collect();
        Corpus::from_records(records, grid).unwrap()
    }

    fn q(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn only_matching_doc_ranked() {
        let c = corpus(&["giuliani mayor", "weather report"]);
        let index = InvertedIndex::build(&c);
        let set = score_lm_dirichlet(&index, &q("giuliani"), DEFAULT_MU, 10).unwrap();
        assert_eq!(set.docs().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn higher_tf_scores_higher() {
        let c = corpus(&["x x y", "x y y"]);
        let index = InvertedIndex::build(&c);
        let set = score_lm_dirichlet(&index, &q("x"), DEFAULT_MU, 10).unwrap();
        assert_eq!(set.entries()[0].doc, 0);
        assert!(set.entries()[0].raw > set.entries()[1].raw);
    }

    #[test]
    fn dirichlet_formula_value() {
        // |d| = 10 with tf(t) = 2, |C| = 3000 with cf(t) = 3 -> cf/|C| = 0.001
        let doc0 = "t t a a a a a a a a";
        let mut texts = vec![doc0.to_string()];
        // 2990 further tokens, one more "t"
        texts.push(format!("t {}", vec!["z"; 2989].join(" ")));
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let c = corpus(&refs);
        let index = InvertedIndex::build(&c);
        assert_eq!(index.collection_len(), 3000);
        let set = score_lm_dirichlet(&index, &q("t"), 1000.0, 10).unwrap();
        let expected = (3.0f64 / 1010.0).ln();
        assert!((set.entries()[0].raw - expected).abs() < 1e-12);
        assert!((expected - -5.819).abs() < 1e-3);
    }

    #[test]
    fn unseen_query_is_empty() {
        let c = corpus(&["a b"]);
        let index = InvertedIndex::build(&c);
        assert!(score_lm_dirichlet(&index, &q("zzz"), 1000.0, 10).unwrap().is_empty());
    }

    #[test]
    fn invalid_arguments() {
        let c = corpus(&["a b"]);
        let index = InvertedIndex::build(&c);
        assert!(score_lm_dirichlet(&index, &q("a"), 0.0, 10).is_err());
        assert!(score_lm_dirichlet(&index, &[], 1000.0, 10).is_err());
    }

    #[test]
    fn large_mu_flattens_differences() {
        let c = corpus(&["x a a a", "x x a a", "x x x a"]);
        let index = InvertedIndex::build(&c);
        let spread = |mu: f64| {
            let set = score_lm_dirichlet(&index, &q("x"), mu, 10).unwrap();
            let raws: Vec<f64> = set.entries().iter().map(|e| e.raw).collect();
            raws[0] - raws[raws.len() - 1]
        };
        assert!(spread(1e3) < spread(1.0));
        assert!(spread(1e9) < 1e-8);
    }

    #[test]
    fn truncation_and_normalization() {
        let scores: Vec<(usize, f64)> = (0..1500).map(|i| (i, -(i as f64))).collect();
        let set = CandidateSet::from_scores(vec![], scores, 1500);
        assert_eq!(set.top_k(1000).len(), 1000);

        let small = CandidateSet::from_scores(vec![], (0..5).map(|i| (i, i as f64)).collect(), 1000);
        assert_eq!(small.top_k(1000).len(), 5);

        let three = CandidateSet::from_scores(vec![], vec![(0, -4.0), (1, -2.0), (2, -6.0)], 10);
        let norm: Vec<f64> = three.entries().iter().map(|c| c.score).collect();
        let raws = [-2.0, -4.0, -6.0];
        let expected: Vec<f64> = raws.iter().map(|s| (s - -6.0) / (-2.0 - -6.0)).collect();
        assert_eq!(norm, expected);
        assert_eq!(norm, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn equal_raw_scores_normalize_to_one_with_id_ties() {
        let set = CandidateSet::from_scores(vec![], vec![(3, -1.0), (1, -1.0), (2, -1.0)], 10);
        assert_eq!(set.docs().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(set.entries().iter().all(|c| c.score == 1.0));
    }

    #[test]
    fn precomputed_scores() {
        let c = corpus(&["", "", ""]);
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "q1\td0\t10\nq1\td1\t0\nq2\td2\t3").unwrap();
        let sets = load_precomputed_scores(f.path(), &c, 1000).unwrap();
        assert_eq!(sets["q1"].len(), 2);
        assert_eq!(sets["q1"].entries()[0].score, 1.0);
        assert_eq!(sets["q1"].entries()[1].score, 0.0);
        assert_eq!(sets.values().map(CandidateSet::len).sum::<usize>(), 3);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "q1\tmissing\t1").unwrap();
        let err = load_precomputed_scores(bad.path(), &c, 1000).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalization_preserves_order(raw in prop::collection::vec(-50i32..50, 1..40), n in 1usize..40) {
                let scores: Vec<(usize, f64)> = raw.iter().enumerate().map(|(i, &s)| (i, s as f64)).collect();
                let set = CandidateSet::from_scores(vec![], scores, 100);
                let e = set.entries();
                for w in e.windows(2) {
                    prop_assert!(w[0].raw >= w[1].raw);
                    prop_assert!(w[0].score >= w[1].score);
                    prop_assert!((0.0..=1.0).contains(&w[1].score));
                }
                let short = set.top_k(n);
                let long = set.top_k(n + 5);
                prop_assert!(short.docs().zip(long.docs()).all(|(a, b)| a == b));
            }
        }
    }
}
