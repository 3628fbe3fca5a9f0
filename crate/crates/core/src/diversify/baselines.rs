use std::collections::{BTreeSet, HashMap};

use crate::corpus::Corpus;
use crate::error::Result;
use crate::priors::PriorSet;
use crate::relevance::CandidateSet;

use super::{argmax, decay_factor, items, prepare, DiversifyConfig, Item, RankedList, Step};

/// How the aspect-based baselines see a document's aspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AspectSpace {
    /// The document's aspects as they are.
    Plain,
    /// Each aspect paired with the publication interval.
    Linearized,
    /// The aspects plus the publication interval as one extra aspect.
    Enriched,
}

const TIME_KEY: u64 = 1 << 63;

impl AspectSpace {
    /// Aspect keys of one candidate, sorted.
    pub fn keys(self, item_aspects: &[crate::corpus::AspectId], interval: usize) -> Vec<u64> {
        let mut keys: Vec<u64> = match self {
            AspectSpace::Plain => item_aspects.iter().map(|a| a.0 as u64).collect(),
            AspectSpace::Linearized => item_aspects
                .iter()
                .map(|a| ((a.0 as u64) << 32) | interval as u64)
                .collect(),
            AspectSpace::Enriched => item_aspects
                .iter()
                .map(|a| a.0 as u64)
                .chain(std::iter::once(TIME_KEY | interval as u64))
                .collect(),
        };
        keys.sort_unstable();
        keys
    }
}

/// Per-candidate aspect keys and their static priors (share of candidates
/// carrying each key).
struct KeyedItems<'a> {
    items: Vec<Item<'a>>,
    keys: Vec<Vec<u64>>,
    prior: HashMap<u64, f64>,
}

impl<'a> KeyedItems<'a> {
    fn new(candidates: &CandidateSet, corpus: &'a Corpus, space: AspectSpace) -> Self {
        let items = items(candidates, corpus);
        let keys: Vec<Vec<u64>> = items.iter().map(|it| space.keys(it.aspects, it.interval)).collect();
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for k in keys.iter().flatten() {
            *counts.entry(*k).or_default() += 1;
        }
        let n = items.len() as f64;
        let prior = counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect();
        KeyedItems { items, keys, prior }
    }
}

fn finish(config: &DiversifyConfig, steps: Vec<Step>) -> RankedList {
    RankedList {
        algorithm: config.algorithm,
        fingerprint: config.fingerprint(),
        steps,
    }
}

fn step(item: &Item<'_>, gain: f64, aspect: f64, time: f64) -> Step {
    Step {
        doc: item.doc,
        gain,
        relevance: item.relevance,
        aspect_utility: aspect,
        time_utility: time,
    }
}

/// Relevance order truncated to `k`.
pub fn lm(candidates: &CandidateSet, config: &DiversifyConfig) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let steps = candidates.entries()[..k]
        .iter()
        .map(|c| Step {
            doc: c.doc,
            gain: c.score,
            relevance: c.score,
            aspect_utility: 0.0,
            time_utility: 0.0,
        })
        .collect();
    Ok(finish(config, steps))
}

/// IA-Select: `g(d) = V(d) * sum_{a in A(d)} U(a)`, with `U(a)` starting at
/// `P(a|q)` and shrinking by `1 - V(d*)` whenever a document carrying `a` is
/// selected.
pub fn ia_select(
    candidates: &CandidateSet,
    corpus: &Corpus,
    space: AspectSpace,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let keyed = KeyedItems::new(candidates, corpus, space);
    let mut utility = keyed.prior.clone();
    let coverage = |utility: &HashMap<u64, f64>, i: usize| -> f64 {
        keyed.keys[i].iter().map(|k| utility[k]).sum()
    };
    let mut taken = vec![false; keyed.items.len()];
    let mut steps = Vec::with_capacity(k);
    while steps.len() < k {
        let Some((best, gain)) = argmax(&keyed.items, &taken, |i| {
            keyed.items[i].relevance * coverage(&utility, i)
        }) else {
            break;
        };
        taken[best] = true;
        let item = &keyed.items[best];
        steps.push(step(item, gain, coverage(&utility, best), 0.0));
        for key in &keyed.keys[best] {
            *utility.get_mut(key).expect("key seen") *= 1.0 - item.relevance;
        }
    }
    Ok(finish(config, steps))
}

/// PM2: proportional seat allocation by Sainte-Laguë quotients.
pub fn pm2(
    candidates: &CandidateSet,
    corpus: &Corpus,
    space: AspectSpace,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let keyed = KeyedItems::new(candidates, corpus, space);
    let universe: BTreeSet<u64> = keyed.prior.keys().copied().collect();
    let mut seats: HashMap<u64, f64> = universe.iter().map(|&k| (k, 0.0)).collect();
    let lambda = config.lambda;
    let mut taken = vec![false; keyed.items.len()];
    let mut steps = Vec::with_capacity(k);
    while steps.len() < k {
        let quotient: HashMap<u64, f64> = universe
            .iter()
            .map(|k| (*k, keyed.prior[k] / (2.0 * seats[k] + 1.0)))
            .collect();
        // most under-represented aspect; ties to the smallest key
        let target = universe
            .iter()
            .copied()
            .fold(None::<u64>, |best, k| match best {
                Some(b) if quotient[&b] >= quotient[&k] => Some(b),
                _ => Some(k),
            });
        let score = |i: usize| -> f64 {
            let keys = &keyed.keys[i];
            if keys.is_empty() {
                return 0.0;
            }
            let m = 1.0 / keys.len() as f64;
            keys.iter()
                .map(|k| {
                    if Some(*k) == target {
                        lambda * quotient[k] * m
                    } else {
                        (1.0 - lambda) * quotient[k] * m
                    }
                })
                .sum()
        };
        let Some((best, gain)) = argmax(&keyed.items, &taken, score) else {
            break;
        };
        taken[best] = true;
        steps.push(step(&keyed.items[best], gain, gain, 0.0));
        let keys = &keyed.keys[best];
        for key in keys {
            *seats.get_mut(key).expect("key seen") += 1.0 / keys.len() as f64;
        }
    }
    Ok(finish(config, steps))
}

/// OnlyTime: relevance traded against the temporal prior of the candidate's
/// interval, decayed by the sigmoid around every selected document.
pub fn onlytime(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let items = items(candidates, corpus);
    let mut residual = priors.temporal.probs.clone();
    let alpha = config.alpha;
    let mut taken = vec![false; items.len()];
    let mut steps = Vec::with_capacity(k);
    while steps.len() < k {
        let Some((best, gain)) = argmax(&items, &taken, |i| {
            alpha * items[i].relevance + (1.0 - alpha) * residual[items[i].interval]
        }) else {
            break;
        };
        taken[best] = true;
        let at = items[best].interval;
        steps.push(step(&items[best], gain, 0.0, residual[at]));
        for (j, r) in residual.iter_mut().enumerate() {
            *r *= decay_factor(config.w, j.abs_diff(at));
        }
    }
    Ok(finish(config, steps))
}

/// EqT: OnlyTime with a uniform prior over the intervals holding candidates
/// and 0/1 discounting of covered intervals.
pub fn eqt(candidates: &CandidateSet, corpus: &Corpus, config: &DiversifyConfig) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let items = items(candidates, corpus);
    let occupied: BTreeSet<usize> = items.iter().map(|it| it.interval).collect();
    let uniform = 1.0 / occupied.len() as f64;
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let alpha = config.alpha;
    let mut taken = vec![false; items.len()];
    let mut steps = Vec::with_capacity(k);
    let utility = |covered: &BTreeSet<usize>, interval: usize| {
        if covered.contains(&interval) {
            0.0
        } else {
            uniform
        }
    };
    while steps.len() < k {
        let Some((best, gain)) = argmax(&items, &taken, |i| {
            alpha * items[i].relevance + (1.0 - alpha) * utility(&covered, items[i].interval)
        }) else {
            break;
        };
        taken[best] = true;
        steps.push(step(&items[best], gain, 0.0, utility(&covered, items[best].interval)));
        covered.insert(items[best].interval);
    }
    Ok(finish(config, steps))
}

/// Two-dimensional novelty diversification over aspects and publication
/// intervals, `lambda * V + (1 - lambda) * (novelty_A + novelty_T) / 2`.
///
/// This is an approximation of MDiv: aspect novelty is the uncovered share
/// of the candidate's aspects, time novelty is 1 for an uncovered interval.
pub fn mdiv(candidates: &CandidateSet, corpus: &Corpus, config: &DiversifyConfig) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let items = items(candidates, corpus);
    let mut covered_aspects = BTreeSet::new();
    let mut covered_intervals = BTreeSet::new();
    let lambda = config.lambda;
    let novelty = |ca: &BTreeSet<_>, ci: &BTreeSet<usize>, item: &Item<'_>| -> (f64, f64) {
        let a = if item.aspects.is_empty() {
            0.0
        } else {
            item.aspects.iter().filter(|a| !ca.contains(*a)).count() as f64 / item.aspects.len() as f64
        };
        let t = if ci.contains(&item.interval) { 0.0 } else { 1.0 };
        (a, t)
    };
    let mut taken = vec![false; items.len()];
    let mut steps = Vec::with_capacity(k);
    while steps.len() < k {
        let Some((best, gain)) = argmax(&items, &taken, |i| {
            let (a, t) = novelty(&covered_aspects, &covered_intervals, &items[i]);
            lambda * items[i].relevance + (1.0 - lambda) * 0.5 * (a + t)
        }) else {
            break;
        };
        taken[best] = true;
        let (a, t) = novelty(&covered_aspects, &covered_intervals, &items[best]);
        steps.push(step(&items[best], gain, a, t));
        covered_aspects.extend(items[best].aspects.iter().copied());
        covered_intervals.insert(items[best].interval);
    }
    Ok(finish(config, steps))
}
