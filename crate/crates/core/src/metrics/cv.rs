use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fold {
    pub test_topics: Vec<String>,
    /// Index into the parameter grid.
    pub chosen: usize,
    pub train_score: f64,
    pub test_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub folds: Vec<Fold>,
    /// Mean objective over every held-out topic.
    pub mean_test_score: f64,
}

/// Contiguous fold ranges over `n` items; the first `n % folds` folds get
/// one extra item.
pub fn fold_ranges(n: usize, folds: usize) -> Vec<Range<usize>> {
    let base = n / folds;
    let extra = n % folds;
    let mut start = 0;
    (0..folds)
        .map(|f| {
            let len = base + usize::from(f < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// K-fold cross-validation over a parameter grid.
///
/// `objective(p, topic)` scores grid point `p` on one topic; `None` marks a
/// topic that cannot be evaluated and is left out of every mean.
pub fn cross_validate<F>(grid_len: usize, topics: &[String], folds: usize, objective: F) -> Result<CvResult>
where
    F: Fn(usize, &str) -> Option<f64>,
{
    if grid_len == 0 {
        return Err(Error::validation("parameter grid is empty"));
    }
    if folds < 2 {
        return Err(Error::validation(format!("need at least 2 folds, got {folds}")));
    }
    if topics.len() < folds {
        return Err(Error::validation(format!(
            "{} topics cannot be split into {folds} folds",
            topics.len()
        )));
    }
    let mut sorted: Vec<&String> = topics.iter().collect();
    sorted.sort();
    let table: Vec<Vec<Option<f64>>> = (0..grid_len)
        .map(|p| sorted.iter().map(|t| objective(p, t)).collect())
        .collect();

    let mean = |p: usize, keep: &dyn Fn(usize) -> bool| -> Option<f64> {
        let vals: Vec<f64> = table[p]
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .filter_map(|(_, v)| *v)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };

    let mut out = Vec::with_capacity(folds);
    let mut held_out = Vec::new();
    for range in fold_ranges(sorted.len(), folds) {
        let train = |i: usize| !range.contains(&i);
        let mut chosen = 0;
        let mut best = f64::NEG_INFINITY;
        for p in 0..grid_len {
            let s = mean(p, &train).unwrap_or(f64::NEG_INFINITY);
            if s > best {
                best = s;
                chosen = p;
            }
        }
        let test: Vec<f64> = range.clone().filter_map(|i| table[chosen][i]).collect();
        held_out.extend_from_slice(&test);
        out.push(Fold {
            test_topics: range.clone().map(|i| sorted[i].clone()).collect(),
            chosen,
            train_score: if best.is_finite() { best } else { 0.0 },
            test_score: if test.is_empty() {
                0.0
            } else {
                test.iter().sum::<f64>() / test.len() as f64
            },
        });
    }
    let mean_test_score = if held_out.is_empty() {
        0.0
    } else {
        held_out.iter().sum::<f64>() / held_out.len() as f64
    };
    Ok(CvResult {
        folds: out,
        mean_test_score,
    })
}
