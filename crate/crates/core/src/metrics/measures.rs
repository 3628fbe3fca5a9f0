use std::collections::HashSet;

use serde::Serialize;

use super::IntentSpace;

/// Stopping probability of a relevant document in ERR.
pub const ERR_STOP: f64 = 0.5;
/// Redundancy penalty of alpha-NDCG.
pub const DEFAULT_NDCG_ALPHA: f64 = 0.5;

/// Subtopic recall: share of intents covered by a relevant document in the
/// top `k`. `None` when the space is not evaluable.
pub fn sbr(run: &[String], space: &IntentSpace, k: usize) -> Option<f64> {
    if !space.is_evaluable() {
        return None;
    }
    let top = &run[..k.min(run.len())];
    let covered = space
        .intents
        .iter()
        .filter(|i| top.iter().any(|d| i.relevant.contains(d)))
        .count();
    Some(covered as f64 / space.intents.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IaMetrics {
    pub precision: f64,
    pub err: f64,
    pub alpha_ndcg: f64,
    pub map: f64,
}

/// Intent-aware precision, ERR and MAP plus alpha-NDCG at depth `k`.
pub fn ia_metrics(run: &[String], space: &IntentSpace, k: usize, ndcg_alpha: f64) -> Option<IaMetrics> {
    if !space.is_evaluable() || k == 0 {
        return None;
    }
    let top = &run[..k.min(run.len())];
    let mut precision = 0.0;
    let mut err = 0.0;
    let mut map = 0.0;
    for intent in &space.intents {
        let rel: Vec<bool> = top.iter().map(|d| intent.relevant.contains(d)).collect();
        let hits = rel.iter().filter(|&&r| r).count();
        precision += intent.weight * hits as f64 / k as f64;

        let mut not_stopped = 1.0;
        let mut e = 0.0;
        for (r, &is_rel) in rel.iter().enumerate() {
            if is_rel {
                e += not_stopped * ERR_STOP / (r + 1) as f64;
                not_stopped *= 1.0 - ERR_STOP;
            }
        }
        err += intent.weight * e;

        let denom = intent.relevant.len().min(k);
        if denom > 0 {
            let mut seen = 0;
            let mut sum = 0.0;
            for (r, &is_rel) in rel.iter().enumerate() {
                if is_rel {
                    seen += 1;
                    sum += seen as f64 / (r + 1) as f64;
                }
            }
            map += intent.weight * sum / denom as f64;
        }
    }
    Some(IaMetrics {
        precision,
        err,
        alpha_ndcg: alpha_ndcg(top, space, k, ndcg_alpha),
        map,
    })
}

/// Novelty-discounted gain of each ranked document.
pub fn alpha_gains<'a>(run: impl IntoIterator<Item = &'a str>, space: &IntentSpace, alpha: f64) -> Vec<f64> {
    let mut seen = vec![0i32; space.intents.len()];
    run.into_iter()
        .map(|d| {
            let mut g = 0.0;
            for (i, intent) in space.intents.iter().enumerate() {
                if intent.relevant.contains(d) {
                    g += (1.0 - alpha).powi(seen[i]);
                    seen[i] += 1;
                }
            }
            g
        })
        .collect()
}

fn dcg(gains: &[f64]) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(r, g)| g / ((r + 2) as f64).log2())
        .sum()
}

/// alpha-NDCG@k against a greedily built ideal ranking.
pub fn alpha_ndcg(run: &[String], space: &IntentSpace, k: usize, alpha: f64) -> f64 {
    let top = &run[..k.min(run.len())];
    let actual = dcg(&alpha_gains(top.iter().map(String::as_str), space, alpha));
    let ideal = dcg(&ideal_gains(space, k, alpha));
    if ideal > 0.0 {
        actual / ideal
    } else {
        0.0
    }
}

fn ideal_gains(space: &IntentSpace, k: usize, alpha: f64) -> Vec<f64> {
    let mut pool: Vec<&str> = space.relevant_pool().into_iter().collect();
    let mut seen = vec![0i32; space.intents.len()];
    let mut gains = Vec::with_capacity(k);
    let mut used: HashSet<&str> = HashSet::new();
    while gains.len() < k {
        let mut best: Option<(&str, f64)> = None;
        for &d in &pool {
            let g: f64 = space
                .intents
                .iter()
                .enumerate()
                .filter(|(_, i)| i.relevant.contains(d))
                .map(|(i, _)| (1.0 - alpha).powi(seen[i]))
                .sum();
            // pool is sorted by id, so the first maximum wins ties
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((d, g));
            }
        }
        let Some((d, g)) = best else { break };
        gains.push(g);
        used.insert(d);
        pool.retain(|p| *p != d);
        for (i, intent) in space.intents.iter().enumerate() {
            if intent.relevant.contains(d) {
                seen[i] += 1;
            }
        }
    }
    gains
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SpaceKind;

    fn space(intents: &[&[&str]]) -> IntentSpace {
        IntentSpace::uniform(
            SpaceKind::AT,
            intents
                .iter()
                .enumerate()
                .map(|(i, docs)| (format!("i{i}"), docs.iter().map(|d| d.to_string()).collect()))
                .collect(),
        )
    }

    fn run(docs: &[&str]) -> Vec<String> {
        docs.iter().map(|d| d.to_string()).collect()
    }

    #[test]
    fn sbr_examples() {
        let s = space(&[&["a"], &["b"], &["c"], &["d"]]);
        assert_eq!(sbr(&run(&["a", "b", "c", "d"]), &s, 4), Some(1.0));
        assert_eq!(sbr(&run(&["a", "x", "c", "d"]), &s, 10), Some(0.75));
        assert_eq!(sbr(&run(&[]), &s, 1), Some(0.0));
        assert_eq!(sbr(&run(&["a"]), &space(&[&[]]), 1), None);
    }

    #[test]
    fn single_relevant_at_rank_one() {
        let s = space(&[&["a"]]);
        let m = ia_metrics(&run(&["a"]), &s, 1, 0.5).unwrap();
        assert_eq!(m, IaMetrics { precision: 1.0, err: 0.5, alpha_ndcg: 1.0, map: 1.0 });
    }

    #[test]
    fn nothing_relevant_is_zero() {
        let s = space(&[&["a"], &["b"]]);
        let m = ia_metrics(&run(&["x", "y"]), &s, 2, 0.5).unwrap();
        assert_eq!(m, IaMetrics { precision: 0.0, err: 0.0, alpha_ndcg: 0.0, map: 0.0 });
    }

    #[test]
    fn redundant_gain_is_halved() {
        let s = space(&[&["a", "b"]]);
        assert_eq!(alpha_gains(["a", "b"], &s, 0.5), vec![1.0, 0.5]);
    }
}
