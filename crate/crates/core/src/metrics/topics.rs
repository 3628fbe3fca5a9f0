use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::TimeInterval;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subtopic {
    pub id: String,
    #[serde(default)]
    pub description: String,
    /// Qualifying intervals.
    pub intervals: Vec<TimeInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub query: String,
    pub subtopics: Vec<Subtopic>,
}

impl Topic {
    pub fn validate(&self, span: Option<TimeInterval>) -> Result<()> {
        if self.subtopics.is_empty() {
            return Err(Error::validation(format!("topic {:?} has no subtopics", self.id)));
        }
        let mut ids = BTreeSet::new();
        for s in &self.subtopics {
            if !ids.insert(&s.id) {
                return Err(Error::validation(format!(
                    "topic {:?} repeats subtopic {:?}",
                    self.id, s.id
                )));
            }
            if s.intervals.is_empty() {
                return Err(Error::validation(format!(
                    "subtopic {:?} of topic {:?} has no qualifying interval",
                    s.id, self.id
                )));
            }
            for iv in &s.intervals {
                if iv.begin > iv.end {
                    return Err(Error::validation(format!(
                        "subtopic {:?} of topic {:?}: interval {}..{} is inverted",
                        s.id, self.id, iv.begin, iv.end
                    )));
                }
                if let Some(span) = span {
                    if !span.contains(iv.begin) || !span.contains(iv.end) {
                        return Err(Error::validation(format!(
                            "subtopic {:?} of topic {:?}: interval {}..{} leaves the collection span",
                            s.id, self.id, iv.begin, iv.end
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Read topics from JSON (one object or an array) or from XML.
pub fn load_topics(path: impl AsRef<Path>) -> Result<Vec<Topic>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let topics = parse_topics(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message,
    })?;
    for t in &topics {
        t.validate(None)?;
    }
    Ok(topics)
}

pub fn parse_topics(text: &str) -> std::result::Result<Vec<Topic>, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('<') {
        return parse_topics_xml(text);
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<Topic>),
        One(Topic),
    }
    match serde_json::from_str::<OneOrMany>(text).map_err(|e| e.to_string())? {
        OneOrMany::Many(v) => Ok(v),
        OneOrMany::One(t) => Ok(vec![t]),
    }
}

/// `<topic id><query/><subtopic id><description/><time begin end/></subtopic></topic>`,
/// optionally wrapped in `<topics>`.
fn parse_topics_xml(text: &str) -> std::result::Result<Vec<Topic>, String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let attr = |node: roxmltree::Node<'_, '_>, name: &str| -> std::result::Result<String, String> {
        node.attribute(name)
            .map(str::to_owned)
            .ok_or_else(|| format!("<{}> lacks attribute {name:?}", node.tag_name().name()))
    };
    let date = |s: String| -> std::result::Result<NaiveDate, String> {
        s.trim().parse().map_err(|e| format!("bad date {s:?}: {e}"))
    };
    let child_text = |node: roxmltree::Node<'_, '_>, name: &str| {
        node.children()
            .find(|c| c.has_tag_name(name))
            .and_then(|c| c.text())
            .map(|t| t.trim().to_owned())
    };

    let mut topics = Vec::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("topic")) {
        let mut subtopics = Vec::new();
        for sub in node.children().filter(|n| n.has_tag_name("subtopic")) {
            let mut intervals = Vec::new();
            for t in sub
                .children()
                .filter(|n| n.has_tag_name("time") || n.has_tag_name("interval"))
            {
                intervals.push(TimeInterval {
                    begin: date(attr(t, "begin")?)?,
                    end: date(attr(t, "end")?)?,
                });
            }
            subtopics.push(Subtopic {
                id: attr(sub, "id")?,
                description: child_text(sub, "description").unwrap_or_default(),
                intervals,
            });
        }
        topics.push(Topic {
            id: attr(node, "id")?,
            query: child_text(node, "query").ok_or("<topic> lacks <query>")?,
            subtopics,
        });
    }
    Ok(topics)
}

/// Binary judgments: the relevant documents of every judged subtopic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Judgments {
    relevant: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>,
    judged: BTreeMap<String, BTreeSet<String>>,
    labels: BTreeMap<(String, String, String), bool>,
}

impl Judgments {
    pub fn insert(&mut self, topic: &str, subtopic: &str, doc: &str, relevant: bool) {
        self.judged
            .entry(topic.to_owned())
            .or_default()
            .insert(doc.to_owned());
        let subs = self.relevant.entry(topic.to_owned()).or_default();
        let docs = subs.entry(subtopic.to_owned()).or_default();
        if relevant {
            docs.insert(doc.to_owned());
        }
        self.labels
            .insert((topic.to_owned(), subtopic.to_owned(), doc.to_owned()), relevant);
    }

    /// Render as qrels rows in sorted order.
    pub fn to_qrels(&self) -> String {
        self.labels
            .iter()
            .map(|((t, s, d), &r)| format!("{t}\t{s}\t{d}\t{}\n", u8::from(r)))
            .collect()
    }

    /// Relevant documents of `(topic, subtopic)`.
    pub fn relevant(&self, topic: &str, subtopic: &str) -> impl Iterator<Item = &str> {
        self.relevant
            .get(topic)
            .and_then(|s| s.get(subtopic))
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    /// Documents relevant to any subtopic of `topic`.
    pub fn relevant_to_topic(&self, topic: &str) -> BTreeSet<&str> {
        self.relevant
            .get(topic)
            .into_iter()
            .flat_map(|s| s.values().flatten())
            .map(String::as_str)
            .collect()
    }

    pub fn judged(&self, topic: &str) -> impl Iterator<Item = &str> {
        self.judged.get(topic).into_iter().flatten().map(String::as_str)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.relevant.keys().map(String::as_str)
    }

    /// Check that every judged topic and subtopic exists.
    pub fn validate(&self, topics: &[Topic]) -> Result<()> {
        for (topic, subs) in &self.relevant {
            let Some(t) = topics.iter().find(|t| &t.id == topic) else {
                return Err(Error::validation(format!("judgments reference unknown topic {topic:?}")));
            };
            for sub in subs.keys() {
                if !t.subtopics.iter().any(|s| &s.id == sub) {
                    return Err(Error::validation(format!(
                        "judgments reference unknown subtopic {sub:?} of topic {topic:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Read `topic<TAB>subtopic<TAB>doc<TAB>{0|1}` rows.
pub fn load_qrels(path: impl AsRef<Path>) -> Result<Judgments> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(&text).map_err(|(line, message)| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

pub fn parse_qrels(text: &str) -> std::result::Result<Judgments, (usize, String)> {
    let mut judgments = Judgments::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [topic, subtopic, doc, rel] = fields[..] else {
            return Err((i + 1, format!("expected 4 tab-separated fields, got {}", fields.len())));
        };
        let relevant = match rel {
            "0" => false,
            "1" => true,
            other => return Err((i + 1, format!("relevance must be 0 or 1, got {other:?}"))),
        };
        judgments.insert(topic, subtopic, doc, relevant);
    }
    Ok(judgments)
}
