//! Annotated archive documents and their temporal discretization.
//!
//! Documents are loaded from JSON Lines, validated against a collection
//! span, and mapped onto a [`TemporalGrid`]. Aspect labels are interned to
//! [`AspectId`]s so the rankers can work with dense integer keys.

mod grid;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{Granularity, TemporalGrid, TimeInterval};

/// Interned aspect label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AspectId(pub u32);

impl AspectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub published: NaiveDate,
    #[serde(default)]
    pub aspects: Vec<String>,
    #[serde(default)]
    pub temporal_refs: Vec<TimeInterval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub published: NaiveDate,
    /// Sorted and deduplicated.
    pub aspects: Vec<AspectId>,
    pub temporal_refs: Vec<TimeInterval>,
    pub text: Option<String>,
}

impl Document {
    pub fn has_aspect(&self, aspect: AspectId) -> bool {
        self.aspects.binary_search(&aspect).is_ok()
    }
}

/// Warnings counted while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadWarnings {
    /// Temporal references partially outside the span, clipped to it.
    pub clipped_refs: usize,
    /// Temporal references wholly outside the span, dropped.
    pub dropped_refs: usize,
}

/// How to discretize a corpus at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    pub span_begin: NaiveDate,
    pub span_end: NaiveDate,
    pub granularity: Granularity,
}

impl GridConfig {
    pub fn build(&self) -> Result<TemporalGrid> {
        TemporalGrid::build(self.span_begin, self.span_end, self.granularity)
    }
}

/// An immutable, validated document collection over one temporal grid.
///
/// Documents are stored sorted by id, so a document index order is the
/// same as the id order used for tie-breaking.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    intervals: Vec<usize>,
    by_id: HashMap<String, usize>,
    grid: TemporalGrid,
    aspect_names: Vec<String>,
    aspect_ids: HashMap<String, AspectId>,
    doc_frequency: Vec<usize>,
    warnings: LoadWarnings,
}

impl Corpus {
    /// Build a corpus from records; record `i` is reported as line `i + 1`.
    pub fn from_records(records: Vec<DocumentRecord>, grid: TemporalGrid) -> Result<Corpus> {
        Self::from_numbered(
            records.into_iter().enumerate().map(|(i, r)| (i + 1, r)),
            grid,
            None,
        )
    }

    fn from_numbered(
        records: impl IntoIterator<Item = (usize, DocumentRecord)>,
        grid: TemporalGrid,
        path: Option<&Path>,
    ) -> Result<Corpus> {
        let fail = |line: usize, message: String| match path {
            Some(p) => Error::Parse {
                path: p.to_path_buf(),
                line,
                message,
            },
            None => Error::Validation(format!("record {line}: {message}")),
        };

        let span = grid.span();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut aspect_names = Vec::new();
        let mut aspect_ids: HashMap<String, AspectId> = HashMap::new();
        let mut warnings = LoadWarnings::default();
        let mut documents = Vec::new();

        for (line, record) in records {
            if record.id.is_empty() {
                return Err(fail(line, "document id is empty".into()));
            }
            if let Some(&first) = seen.get(&record.id) {
                return Err(Error::validation(format!(
                    "duplicate document id {:?} on lines {first} and {line}",
                    record.id
                )));
            }
            seen.insert(record.id.clone(), line);
            if !span.contains(record.published) {
                return Err(fail(
                    line,
                    format!(
                        "document {:?} published {} outside collection span {}..={}",
                        record.id, record.published, span.begin, span.end
                    ),
                ));
            }

            let mut aspects: Vec<AspectId> = record
                .aspects
                .into_iter()
                .map(|name| {
                    *aspect_ids.entry(name).or_insert_with_key(|name| {
                        aspect_names.push(name.clone());
                        AspectId(aspect_names.len() as u32 - 1)
                    })
                })
                .collect();
            aspects.sort_unstable();
            aspects.dedup();

            let mut temporal_refs = Vec::with_capacity(record.temporal_refs.len());
            for r in record.temporal_refs {
                if r.begin > r.end {
                    return Err(fail(
                        line,
                        format!("temporal reference {}..{} is inverted", r.begin, r.end),
                    ));
                }
                match r.clip(&span) {
                    Some(c) if c == r => temporal_refs.push(c),
                    Some(c) => {
                        warnings.clipped_refs += 1;
                        temporal_refs.push(c);
                    }
                    None => warnings.dropped_refs += 1,
                }
            }

            documents.push(Document {
                id: record.id,
                published: record.published,
                aspects,
                temporal_refs,
                text: record.text,
            });
        }

        if warnings.clipped_refs + warnings.dropped_refs > 0 {
            log::warn!(
                "{} temporal references clipped, {} dropped (outside {}..={})",
                warnings.clipped_refs,
                warnings.dropped_refs,
                span.begin,
                span.end
            );
        }

        documents.sort_by(|a, b| a.id.cmp(&b.id));
        let intervals = documents
            .iter()
            .map(|d| grid.interval_of(d.published))
            .collect::<Result<Vec<_>>>()?;
        let by_id = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), i))
            .collect();
        let mut corpus = Corpus {
            documents,
            intervals,
            by_id,
            grid,
            aspect_names,
            aspect_ids,
            doc_frequency: Vec::new(),
            warnings,
        };
        corpus.recount_aspects();
        Ok(corpus)
    }

    fn recount_aspects(&mut self) {
        let mut df = vec![0usize; self.aspect_names.len()];
        for doc in &self.documents {
            for a in &doc.aspects {
                df[a.index()] += 1;
            }
        }
        self.doc_frequency = df;
    }

    /// Load a JSON Lines corpus file.
    pub fn load(path: impl AsRef<Path>, config: &GridConfig) -> Result<Corpus> {
        let path = path.as_ref();
        let records = read_numbered(path)?;
        Self::from_numbered(records, config.build()?, Some(path))
    }

    /// Load a corpus over whole calendar years covering every publication
    /// date in the file.
    pub fn load_spanning(path: impl AsRef<Path>, granularity: Granularity) -> Result<Corpus> {
        let path = path.as_ref();
        let records = read_numbered(path)?;
        let (Some(first), Some(last)) = (
            records.iter().map(|(_, r)| r.published).min(),
            records.iter().map(|(_, r)| r.published).max(),
        ) else {
            return Err(Error::validation(format!("corpus {} is empty", path.display())));
        };
        let grid = TemporalGrid::build(
            NaiveDate::from_ymd_opt(first.year(), 1, 1).expect("january first"),
            NaiveDate::from_ymd_opt(last.year(), 12, 31).expect("december 31st"),
            granularity,
        )?;
        Self::from_numbered(records, grid, Some(path))
    }

    /// Rebuild this corpus over a different grid.
    pub fn regrid(&self, grid: TemporalGrid) -> Result<Corpus> {
        let intervals = self
            .documents
            .iter()
            .map(|d| grid.interval_of(d.published))
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus {
            intervals,
            grid,
            ..self.clone()
        })
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, index: usize) -> &Document {
        &self.documents[index]
    }

    /// Elementary interval of the publication date of document `index`.
    pub fn interval_of_doc(&self, index: usize) -> usize {
        self.intervals[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn aspect_id(&self, name: &str) -> Option<AspectId> {
        self.aspect_ids.get(name).copied()
    }

    pub fn aspect_name(&self, aspect: AspectId) -> &str {
        &self.aspect_names[aspect.index()]
    }

    pub fn aspect_count(&self) -> usize {
        self.aspect_names.len()
    }

    /// Number of documents carrying `aspect`.
    pub fn doc_frequency(&self, aspect: AspectId) -> usize {
        self.doc_frequency[aspect.index()]
    }

    pub fn warnings(&self) -> LoadWarnings {
        self.warnings
    }

    /// IDF of `aspect` normalized to `[0, 1]` by `log N`.
    pub fn normalized_idf(&self, aspect: AspectId) -> f64 {
        normalized_idf(self.len(), self.doc_frequency(aspect))
    }

    /// Drop aspects whose normalized IDF falls below `threshold`.
    ///
    /// Documents whose aspect set becomes empty are kept.
    pub fn filter_aspects(&self, threshold: f64) -> Corpus {
        let keep: Vec<bool> = (0..self.aspect_count())
            .map(|a| self.normalized_idf(AspectId(a as u32)) >= threshold)
            .collect();
        let mut filtered = self.clone();
        for doc in &mut filtered.documents {
            doc.aspects.retain(|a| keep[a.index()]);
        }
        filtered.recount_aspects();
        filtered
    }

    /// Write the corpus back out as JSON Lines (aspects by name).
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for doc in &self.documents {
            let record = DocumentRecord {
                id: doc.id.clone(),
                published: doc.published,
                aspects: doc
                    .aspects
                    .iter()
                    .map(|&a| self.aspect_name(a).to_owned())
                    .collect(),
                temporal_refs: doc.temporal_refs.clone(),
                text: doc.text.clone(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parse a JSON Lines file into raw records without validating them.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<DocumentRecord>> {
    Ok(read_numbered(path.as_ref())?.into_iter().map(|(_, r)| r).collect())
}

fn read_numbered(path: &Path) -> Result<Vec<(usize, DocumentRecord)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        records.push((line_no, record));
    }
    Ok(records)
}

/// `log(N / df) / log(N)`; zero when undefined (`N <= 1` or `df == 0`).
pub fn normalized_idf(n: usize, df: usize) -> f64 {
    if n <= 1 || df == 0 {
        return 0.0;
    }
    let n = n as f64;
    (n / df as f64).ln() / n.ln()
}

/// Spread a temporal reference uniformly over the grid intervals it
/// overlaps. Each overlapped interval receives `1 / |I|`.
pub fn project_reference(reference: &TimeInterval, grid: &TemporalGrid) -> Vec<(usize, f64)> {
    let cells = grid.overlapping(reference);
    let mass = 1.0 / cells.len() as f64;
    cells.map(|i| (i, mass)).collect()
}
