//! Dictionary-based stand-in for entity linking and temporal tagging.

use std::path::Path;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::{Regex, RegexBuilder};

use crate::corpus::{DocumentRecord, TimeInterval};
use crate::error::{Error, Result};

static YEAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(19\d\d|20\d\d)\b").expect("year pattern"));

/// Surface forms mapped to aspect ids.
#[derive(Debug, Clone)]
pub struct AspectDictionary {
    entries: Vec<(Regex, String)>,
}

impl AspectDictionary {
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<AspectDictionary> {
        let entries = pairs
            .into_iter()
            .map(|(surface, aspect)| {
                let pattern = format!(r"\b{}\b", regex::escape(surface.trim()));
                RegexBuilder::new(&pattern)
                    .case_insensitive(true)
                    .build()
                    .map(|re| (re, aspect.trim().to_owned()))
                    .map_err(|e| Error::validation(format!("bad surface form {surface:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(AspectDictionary { entries })
    }

    /// Read `surface<TAB>aspect` rows; `#` starts a comment line.
    pub fn load(path: impl AsRef<Path>) -> Result<AspectDictionary> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((surface, aspect)) = line.split_once('\t') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected surface<TAB>aspect".into(),
                });
            };
            pairs.push((surface, aspect));
        }
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Aspects whose surface form occurs in `text`, sorted and deduplicated.
    pub fn aspects(&self, text: &str) -> Vec<String> {
        let mut hits: Vec<String> = self
            .entries
            .iter()
            .filter(|(re, _)| re.is_match(text))
            .map(|(_, a)| a.clone())
            .collect();
        hits.sort();
        hits.dedup();
        hits
    }
}

/// Full calendar years mentioned in `text`.
pub fn year_references(text: &str) -> Vec<TimeInterval> {
    let mut years: Vec<i32> = YEAR
        .find_iter(text)
        .filter_map(|m| m.as_str().parse().ok())
        .collect();
    years.sort_unstable();
    years.dedup();
    years
        .into_iter()
        .map(|y| TimeInterval {
            begin: NaiveDate::from_ymd_opt(y, 1, 1).expect("january first"),
            end: NaiveDate::from_ymd_opt(y, 12, 31).expect("december 31st"),
        })
        .collect()
}

/// Replace aspects and temporal references of every record that has text.
pub fn annotate_fallback(records: &mut [DocumentRecord], dictionary: &AspectDictionary) {
    for r in records {
        if let Some(text) = &r.text {
            r.aspects = dictionary.aspects(text);
            r.temporal_refs = year_references(text);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(text: &str) -> DocumentRecord {
        DocumentRecord {
            id: "d".into(),
            published: "2000-01-01".parse().unwrap(),
            aspects: vec!["old".into()],
            temporal_refs: vec![],
            text: Some(text.into()),
        }
    }

    #[test]
    fn dictionary_and_years() {
        let dict = AspectDictionary::new([("Giuliani", "E1")]).unwrap();
        let mut r = [record("Giuliani ran in 1993")];
        annotate_fallback(&mut r, &dict);
        assert_eq!(r[0].aspects, vec!["E1"]);
        let y = "1993-01-01".parse().unwrap();
        assert_eq!(r[0].temporal_refs, vec![TimeInterval { begin: y, end: "1993-12-31".parse().unwrap() }]);
    }

    #[test]
    fn no_hits_and_duplicates() {
        let dict = AspectDictionary::new([("Giuliani", "E1"), ("Rudolph Giuliani", "E1"), ("Dinkins", "E2")]).unwrap();
        let mut r = [record("nothing here, not even 1850 or 21000"), record("Rudolph GIULIANI and giuliani, 1989 1989")];
        annotate_fallback(&mut r, &dict);
        assert!(r[0].aspects.is_empty() && r[0].temporal_refs.is_empty());
        assert_eq!(r[1].aspects, vec!["E1"]);
        assert_eq!(r[1].temporal_refs.len(), 1);
    }

    #[test]
    fn word_boundaries() {
        let dict = AspectDictionary::new([("Koch", "E3")]).unwrap();
        assert!(dict.aspects("Kochs brothers").is_empty());
        assert_eq!(dict.aspects("Mayor Koch."), vec!["E3"]);
    }
}
