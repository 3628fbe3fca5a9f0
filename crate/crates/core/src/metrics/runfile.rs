//! Six-column run files: `query_id Q0 doc_id rank score tag`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc: String,
    pub score: f64,
}

/// Ranked documents per topic.
pub type Run = BTreeMap<String, Vec<RunEntry>>;

/// Render one topic's ranking. Scores use nine decimals so equal rankings
/// render identically regardless of how they were produced.
pub fn format_run(topic: &str, entries: &[RunEntry], tag: &str) -> String {
    let mut out = String::new();
    for (rank, e) in entries.iter().enumerate() {
        let _ = writeln!(out, "{topic} Q0 {} {} {:.9} {tag}", e.doc, rank + 1, e.score);
    }
    out
}

pub fn parse_run(text: &str) -> std::result::Result<Run, (usize, String)> {
    let mut run: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err((i + 1, format!("expected 6 columns, found {}", cols.len())));
        }
        let rank: usize = cols[3].parse().map_err(|_| (i + 1, format!("bad rank {:?}", cols[3])))?;
        let score: f64 = cols[4].parse().map_err(|_| (i + 1, format!("bad score {:?}", cols[4])))?;
        run.entry(cols[0].to_owned()).or_default().push((
            rank,
            RunEntry {
                doc: cols[2].to_owned(),
                score,
            },
        ));
    }
    Ok(run
        .into_iter()
        .map(|(t, mut v)| {
            v.sort_by_key(|(r, _)| *r);
            (t, v.into_iter().map(|(_, e)| e).collect())
        })
        .collect())
}

pub fn load_run(path: impl AsRef<Path>) -> Result<Run> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run(&text).map_err(|(line, message)| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}
