//! Synthetic news archive with planted aspect-time structure.
//!
//! Every topic has a handful of subtopics. Each subtopic is an entity that is
//! newsworthy in a few short, disjoint time windows; documents about it are
//! published in bursts inside those windows. One subtopic per topic dominates
//! the text statistics so that a relevance-only ranking is lopsided. Around
//! the topical documents sit retrospective articles (published later, citing
//! the window as a temporal reference) and background noise.

use std::fs;
use std::path::Path;

use chrono::{Datelike, Months, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DocumentRecord, GridConfig, TimeInterval};
use crate::error::{Error, Result};
use crate::metrics::{Judgments, Subtopic, Topic};
use crate::Granularity;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub docs: usize,
    pub topics: usize,
    pub subtopics: usize,
    /// First and last year of the archive.
    pub years: (i32, i32),
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            docs: 5000,
            topics: 10,
            subtopics: 5,
            years: (1987, 2006),
        }
    }
}

impl SynthConfig {
    pub fn grid_config(&self, granularity: Granularity) -> GridConfig {
        GridConfig {
            span_begin: ymd(self.years.0, 1, 1),
            span_end: ymd(self.years.1, 12, 31),
            granularity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthArchive {
    pub records: Vec<DocumentRecord>,
    pub topics: Vec<Topic>,
    pub judgments: Judgments,
}

const FILLER_WORDS: usize = 2000;
/// Entities mentioned everywhere; the IDF filter is expected to drop them.
const COMMON_ASPECTS: [&str; 4] = ["new_york", "united_states", "washington", "city_hall"];
const RARE_ASPECTS: usize = 3000;
const WINDOW_MONTHS: u32 = 3;

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

fn month_end(first: NaiveDate) -> NaiveDate {
    first + Months::new(1) - chrono::Days::new(1)
}

fn random_day(rng: &mut ChaCha8Rng, iv: &TimeInterval) -> NaiveDate {
    let days = (iv.end - iv.begin).num_days();
    iv.begin + chrono::Days::new(rng.random_range(0..=days) as u64)
}

fn common(rng: &mut ChaCha8Rng) -> Vec<String> {
    COMMON_ASPECTS
        .iter()
        .filter(|_| rng.random_bool(0.35))
        .map(|a| a.to_string())
        .collect()
}

fn text(rng: &mut ChaCha8Rng, query: &str, tf: usize, len: usize) -> String {
    let mut words: Vec<String> = (0..len.saturating_sub(tf))
        .map(|_| format!("w{}", rng.random_range(0..FILLER_WORDS)))
        .collect();
    words.extend(std::iter::repeat_n(query.to_owned(), tf));
    words.shuffle(rng);
    words.join(" ")
}

pub fn generate(config: &SynthConfig) -> Result<SynthArchive> {
    let (first_year, last_year) = config.years;
    let years = (last_year - first_year + 1) as usize;
    if config.topics == 0 || config.subtopics == 0 {
        return Err(Error::validation("need at least one topic and one subtopic"));
    }
    if config.subtopics * 3 > years {
        return Err(Error::validation(format!(
            "{} subtopics need at least {} years of archive",
            config.subtopics,
            config.subtopics * 3
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let span = TimeInterval::new(ymd(first_year, 1, 1), ymd(last_year, 12, 31))?;
    let per_topic = config.docs / config.topics;
    let mut drafts: Vec<(Option<(usize, usize)>, DocumentRecord)> = Vec::with_capacity(config.docs);
    let mut topics = Vec::with_capacity(config.topics);

    let draft = |published, aspects, temporal_refs, text| DocumentRecord {
        id: String::new(),
        published,
        aspects,
        temporal_refs,
        text: Some(text),
    };

    for t in 0..config.topics {
        let topic_id = format!("T{:02}", t + 1);
        let query = format!("topic{:02}", t + 1);
        let mut year_pool: Vec<i32> = (first_year..=last_year).collect();
        year_pool.shuffle(&mut rng);
        let mut subtopics = Vec::with_capacity(config.subtopics);
        let mut topical = 0;
        for s in 0..config.subtopics {
            let entity = format!("{query}_e{}", s + 1);
            let dominant = s == 0;
            let n_windows = rng.random_range(1..=3);
            let mut intervals = Vec::with_capacity(n_windows);
            for _ in 0..n_windows {
                let year = year_pool.pop().expect("enough years for all windows");
                let start = ymd(year, rng.random_range(1..=12 - WINDOW_MONTHS + 1), 1);
                let end = month_end(start + Months::new(WINDOW_MONTHS - 1));
                intervals.push(TimeInterval::new(start, end)?);
            }
            for (w, iv) in intervals.iter().enumerate() {
                // the dominant entity's first window is the big story
                let n = if dominant && w == 0 { 45 } else { rng.random_range(12..=20) };
                for _ in 0..n {
                    let tf = if dominant { rng.random_range(4..=8) } else { rng.random_range(1..=4) };
                    let len = rng.random_range(120..=220);
                    let mut aspects = common(&mut rng);
                    aspects.push(entity.clone());
                    if rng.random_bool(0.5) {
                        aspects.push(format!("{entity}_c"));
                    }
                    let body = text(&mut rng, &query, tf, len);
                    drafts.push((Some((t, s)), draft(random_day(&mut rng, iv), aspects, vec![], body)));
                    topical += 1;
                }
            }
            // retrospectives: later articles looking back at the window
            for _ in 0..3 {
                let iv = intervals[rng.random_range(0..intervals.len())];
                let from = (iv.end.year() + 1).min(last_year);
                let published = random_day(&mut rng, &TimeInterval::new(ymd(from, 1, 1), span.end)?);
                let (tf, len) = (rng.random_range(1..=2), rng.random_range(120..=220));
                let body = text(&mut rng, &query, tf, len);
                let mut aspects = common(&mut rng);
                aspects.push(entity.clone());
                drafts.push((Some((t, s)), draft(published, aspects, vec![iv], body)));
                topical += 1;
            }
            subtopics.push(Subtopic {
                id: format!("S{}", s + 1),
                description: format!("{entity} in the news"),
                intervals,
            });
        }
        // background: matches the query weakly or not at all
        for i in 0..per_topic.saturating_sub(topical) {
            let tf = if i % 3 == 0 { 0 } else { rng.random_range(1..=2) };
            let mut aspects = common(&mut rng);
            if rng.random_bool(0.3) {
                aspects.push(format!("x{}", rng.random_range(0..RARE_ASPECTS)));
            }
            let len = rng.random_range(120..=260);
            let body = text(&mut rng, &query, tf, len);
            drafts.push((None, draft(random_day(&mut rng, &span), aspects, vec![], body)));
        }
        topics.push(Topic {
            id: topic_id,
            query,
            subtopics,
        });
    }

    drafts.shuffle(&mut rng);
    let mut judgments = Judgments::default();
    let mut records = Vec::with_capacity(drafts.len());
    for (i, (owner, mut record)) in drafts.into_iter().enumerate() {
        record.id = format!("d{i:05}");
        record.aspects.sort();
        record.aspects.dedup();
        if let Some((t, s)) = owner {
            let topic = &topics[t];
            for (j, sub) in topic.subtopics.iter().enumerate() {
                judgments.insert(&topic.id, &sub.id, &record.id, j == s);
            }
        }
        records.push(record);
    }
    Ok(SynthArchive {
        records,
        topics,
        judgments,
    })
}

impl SynthArchive {
    /// Write `corpus.jsonl`, `topics.json` and `qrels.tsv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut corpus = String::new();
        for r in &self.records {
            corpus.push_str(&serde_json::to_string(r).expect("records serialize"));
            corpus.push('\n');
        }
        let write = |name: &str, body: &str| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))
        };
        write("corpus.jsonl", &corpus)?;
        write(
            "topics.json",
            &serde_json::to_string_pretty(&self.topics).expect("topics serialize"),
        )?;
        write("qrels.tsv", &self.judgments.to_qrels())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            docs: 600,
            topics: 2,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.judgments, b.judgments);
    }

    #[test]
    fn windows_are_disjoint_within_a_topic() {
        let archive = generate(&small()).unwrap();
        for topic in &archive.topics {
            let mut windows: Vec<TimeInterval> =
                topic.subtopics.iter().flat_map(|s| s.intervals.clone()).collect();
            windows.sort_by_key(|w| w.begin);
            for pair in windows.windows(2) {
                assert!(pair[0].end < pair[1].begin);
            }
            topic.validate(None).unwrap();
        }
    }

    #[test]
    fn relevant_documents_carry_their_entity() {
        let archive = generate(&small()).unwrap();
        for topic in &archive.topics {
            for (s, sub) in topic.subtopics.iter().enumerate() {
                let entity = format!("{}_e{}", topic.query, s + 1);
                for doc in archive.judgments.relevant(&topic.id, &sub.id) {
                    let r = archive.records.iter().find(|r| r.id == doc).unwrap();
                    assert!(r.aspects.contains(&entity));
                }
            }
        }
        assert_eq!(archive.records.len(), 600);
    }
}
