use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::measures::{ia_metrics, sbr, DEFAULT_NDCG_ALPHA};
use super::significance::{randomization_test, win_loss, WinLoss};
use super::{SpaceKind, Spaces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "SBR")]
    Sbr,
    #[serde(rename = "IA-P")]
    IaP,
    #[serde(rename = "IA-ERR")]
    IaErr,
    #[serde(rename = "alpha-NDCG")]
    AlphaNdcg,
    #[serde(rename = "MAP")]
    Map,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Sbr, Metric::IaP, Metric::IaErr, Metric::AlphaNdcg, Metric::Map];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Sbr => "SBR",
            Metric::IaP => "IA-P",
            Metric::IaErr => "IA-ERR",
            Metric::AlphaNdcg => "alpha-NDCG",
            Metric::Map => "MAP",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::validation(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub run: String,
    pub metric: Metric,
    pub space: SpaceKind,
    pub k: usize,
    pub topic: String,
    pub value: f64,
}

/// A failed (run, topic) cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellError {
    pub run: String,
    pub topic: String,
    pub message: String,
}

/// Compute every metric for one ranking of one topic.
pub fn evaluate_topic(run: &str, topic: &str, docs: &[String], spaces: &Spaces, depths: &[usize]) -> Vec<MetricRow> {
    let mut rows = Vec::new();
    for space in SpaceKind::ALL {
        let s = spaces.get(space);
        for &k in depths {
            let Some(recall) = sbr(docs, s, k) else {
                continue;
            };
            let Some(ia) = ia_metrics(docs, s, k, DEFAULT_NDCG_ALPHA) else {
                continue;
            };
            let values = [
                (Metric::Sbr, recall),
                (Metric::IaP, ia.precision),
                (Metric::IaErr, ia.err),
                (Metric::AlphaNdcg, ia.alpha_ndcg),
                (Metric::Map, ia.map),
            ];
            rows.extend(values.into_iter().map(|(metric, value)| MetricRow {
                run: run.to_owned(),
                metric,
                space,
                k,
                topic: topic.to_owned(),
                value,
            }));
        }
    }
    rows
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
    pub errors: Vec<CellError>,
}

pub const MEAN_TOPIC: &str = "all";

impl MetricReport {
    /// Put rows in a canonical order so reports are independent of
    /// evaluation order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.run, a.metric, a.space, a.k, &a.topic).cmp(&(&b.run, b.metric, b.space, b.k, &b.topic))
        });
        self.errors.sort_by(|a, b| (&a.run, &a.topic).cmp(&(&b.run, &b.topic)));
    }

    pub fn runs(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.run.as_str()).collect()
    }

    pub fn depths(&self) -> BTreeSet<usize> {
        self.rows.iter().map(|r| r.k).collect()
    }

    pub fn per_topic(&self, run: &str, metric: Metric, space: SpaceKind, k: usize) -> BTreeMap<String, f64> {
        self.rows
            .iter()
            .filter(|r| r.run == run && r.metric == metric && r.space == space && r.k == k)
            .map(|r| (r.topic.clone(), r.value))
            .collect()
    }

    pub fn mean(&self, run: &str, metric: Metric, space: SpaceKind, k: usize) -> Option<f64> {
        let v = self.per_topic(run, metric, space, k);
        (!v.is_empty()).then(|| v.values().sum::<f64>() / v.len() as f64)
    }

    pub fn win_loss(&self, run: &str, baseline: &str, k: usize) -> Result<WinLoss> {
        win_loss(
            &self.per_topic(run, Metric::Sbr, SpaceKind::AT, k),
            &self.per_topic(baseline, Metric::Sbr, SpaceKind::AT, k),
        )
    }

    /// Randomization-test p-value of the AT-SBR@k difference between two runs.
    pub fn p_value(&self, a: &str, b: &str, k: usize, iterations: usize, seed: u64) -> Result<f64> {
        let (xa, xb) = self.paired(a, b, Metric::Sbr, SpaceKind::AT, k);
        randomization_test(&xa, &xb, iterations, seed)
    }

    /// Scores of two runs on the topics both were evaluated on.
    pub fn paired(&self, a: &str, b: &str, metric: Metric, space: SpaceKind, k: usize) -> (Vec<f64>, Vec<f64>) {
        let pa = self.per_topic(a, metric, space, k);
        let pb = self.per_topic(b, metric, space, k);
        pa.iter()
            .filter_map(|(t, &x)| pb.get(t).map(|&y| (x, y)))
            .unzip()
    }

    /// Per-topic rows followed by one mean row per (run, metric, space, k).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("run\tmetric\tspace\tk\ttopic\tvalue\n");
        let mut groups: BTreeMap<(&str, Metric, SpaceKind, usize), (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", r.run, r.metric, r.space, r.k, r.topic, r.value);
            let g = groups.entry((&r.run, r.metric, r.space, r.k)).or_default();
            g.0 += r.value;
            g.1 += 1;
        }
        for ((run, metric, space, k), (sum, n)) in groups {
            let _ = writeln!(out, "{run}\t{metric}\t{space}\t{k}\t{MEAN_TOPIC}\t{}", sum / n as f64);
        }
        for e in &self.errors {
            let _ = writeln!(out, "# error\t{}\t{}\t{}", e.run, e.topic, e.message.replace(['\t', '\n'], " "));
        }
        out
    }

    /// Summary in the shape of the usual diversity table: per depth, mean
    /// `metric` in A, T and AT, with AT win/loss percentages against
    /// `baseline` in parentheses.
    pub fn summary(&self, metric: Metric, baseline: &str) -> String {
        let depths: Vec<usize> = self.depths().into_iter().collect();
        let runs = self.runs();
        let width = runs.iter().map(|r| r.len()).max().unwrap_or(0).max(9);
        let mut out = String::new();
        let _ = write!(out, "{:width$}", metric.as_str());
        for k in &depths {
            let _ = write!(out, " | {:^32}", format!("k={k}"));
        }
        out.push('\n');
        let _ = write!(out, "{:width$}", "");
        for _ in &depths {
            let _ = write!(out, " | {:>6} {:>6} {:>18}", "A", "T", "AT (W/L)");
        }
        out.push('\n');
        for run in runs {
            let _ = write!(out, "{run:width$}");
            for &k in &depths {
                let cell = |s| {
                    self.mean(run, metric, s, k)
                        .map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"))
                };
                let wl = if run == baseline {
                    String::new()
                } else {
                    self.win_loss(run, baseline, k)
                        .map(|w| format!(" ({:.0}/{:.0})", w.win_pct(), w.loss_pct()))
                        .unwrap_or_default()
                };
                let _ = write!(
                    out,
                    " | {:>6} {:>6} {:>18}",
                    cell(SpaceKind::A),
                    cell(SpaceKind::T),
                    format!("{}{wl}", cell(SpaceKind::AT))
                );
            }
            out.push('\n');
        }
        out
    }
}
