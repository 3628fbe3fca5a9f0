use std::collections::HashMap;

use crate::corpus::{AspectId, Corpus};
use crate::error::Result;
use crate::priors::{BurstSet, PriorSet};
use crate::relevance::CandidateSet;

use super::{argmax, items, prepare, DecayScope, DiversifyConfig, Item, RankedList, Step};

/// Discount applied to a cell `distance` intervals away from a selected
/// document: `1 - 1 / (1 + e^(-w + distance))`.
pub fn decay_factor(w: f64, distance: usize) -> f64 {
    1.0 - 1.0 / (1.0 + (-w + distance as f64).exp())
}

/// Burst-dependent decay window for a document published in interval
/// `doc_interval`, evaluated against the cell starting at `cell_interval`.
///
/// The window reaches back to the start of the document's segment for
/// earlier cells and forward to its end for later ones, floored at 1.
pub fn burst_window(doc_interval: usize, cell_interval: usize, bursts: &BurstSet) -> f64 {
    let segment = bursts.burst_of(doc_interval);
    let w = if doc_interval >= cell_interval {
        doc_interval.abs_diff(segment.begin)
    } else {
        doc_interval.abs_diff(segment.end)
    };
    w.max(1) as f64
}

/// Aspect utility of `aspect` in `interval` given the selected documents,
/// evaluated from scratch.
pub fn u_aspect(
    aspect: AspectId,
    interval: usize,
    selected: &[usize],
    corpus: &Corpus,
    priors: &PriorSet,
    w: f64,
) -> f64 {
    selected
        .iter()
        .filter(|&&d| corpus.document(d).has_aspect(aspect))
        .fold(priors.aspect.get(aspect, interval), |u, &d| {
            u * decay_factor(w, interval.abs_diff(corpus.interval_of_doc(d)))
        })
}

/// Time utility of `interval` given the selected documents, evaluated from
/// scratch over the candidate set.
pub fn u_time(
    interval: usize,
    selected: &[usize],
    candidates: &CandidateSet,
    corpus: &Corpus,
    priors: &PriorSet,
) -> f64 {
    let in_interval: Vec<usize> = candidates
        .docs()
        .filter(|&d| corpus.interval_of_doc(d) == interval)
        .collect();
    selected.iter().fold(priors.temporal.get(interval), |u, &s| {
        if in_interval.is_empty() {
            return u;
        }
        let chosen = &corpus.document(s).aspects;
        let covered = in_interval
            .iter()
            .filter(|&&d| shares_aspect(&corpus.document(d).aspects, chosen))
            .count();
        u * (1.0 - covered as f64 / in_interval.len() as f64)
    })
}

fn shares_aspect(a: &[AspectId], b: &[AspectId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Residual utilities during a greedy run.
///
/// Aspect cells exist only for `(aspect, interval)` pairs that occur among
/// the candidates; both residual vectors only ever shrink.
#[derive(Debug, Clone)]
pub struct UtilityState {
    cell_slot: HashMap<(AspectId, usize), usize>,
    /// `(interval, slot)` per aspect.
    cells_by_aspect: HashMap<AspectId, Vec<(usize, usize)>>,
    aspect: Vec<f64>,
    time: Vec<f64>,
}

impl UtilityState {
    fn new(items: &[Item<'_>], priors: &PriorSet) -> UtilityState {
        let mut cell_slot = HashMap::new();
        let mut cells_by_aspect: HashMap<AspectId, Vec<(usize, usize)>> = HashMap::new();
        let mut aspect = Vec::new();
        for item in items {
            for &a in item.aspects {
                cell_slot.entry((a, item.interval)).or_insert_with(|| {
                    let slot = aspect.len();
                    aspect.push(priors.aspect.get(a, item.interval));
                    cells_by_aspect.entry(a).or_default().push((item.interval, slot));
                    slot
                });
            }
        }
        UtilityState {
            cell_slot,
            cells_by_aspect,
            aspect,
            time: priors.temporal.probs.clone(),
        }
    }

    /// Residual `U_aspect(a | q, S, interval)`; zero for cells no candidate occupies.
    pub fn aspect(&self, aspect: AspectId, interval: usize) -> f64 {
        self.cell_slot
            .get(&(aspect, interval))
            .map_or(0.0, |&s| self.aspect[s])
    }

    /// Residual `U_time(interval | q, S)`.
    pub fn time(&self, interval: usize) -> f64 {
        self.time[interval]
    }

    pub fn aspect_residuals(&self) -> &[f64] {
        &self.aspect
    }

    pub fn time_residuals(&self) -> &[f64] {
        &self.time
    }
}

struct Run<'a> {
    items: Vec<Item<'a>>,
    /// Candidate counts per interval.
    counts: &'a [usize],
    bursts: Option<&'a BurstSet>,
    state: UtilityState,
    config: DiversifyConfig,
}

impl Run<'_> {
    fn aspect_sum(&self, item: &Item<'_>) -> f64 {
        item.aspects
            .iter()
            .map(|&a| self.state.aspect[self.state.cell_slot[&(a, item.interval)]])
            .sum()
    }

    fn gain(&self, i: usize) -> (f64, f64, f64) {
        let item = &self.items[i];
        let c = &self.config;
        let aspect = self.aspect_sum(item);
        let time = self.state.time[item.interval];
        let g = c.alpha * item.relevance + (1.0 - c.alpha) * (c.beta * aspect + (1.0 - c.beta) * time);
        (g, aspect, time)
    }

    fn window(&self, doc_interval: usize, cell_interval: usize) -> f64 {
        match self.bursts {
            Some(b) => burst_window(doc_interval, cell_interval, b),
            None => self.config.w,
        }
    }

    fn select(&mut self, chosen: usize) {
        let doc_interval = self.items[chosen].interval;
        let chosen_aspects = self.items[chosen].aspects;

        match self.config.decay_scope {
            DecayScope::AspectCarriers => {
                for a in chosen_aspects {
                    for &(interval, slot) in &self.state.cells_by_aspect[a] {
                        let w = self.window(doc_interval, interval);
                        self.state.aspect[slot] *= decay_factor(w, interval.abs_diff(doc_interval));
                    }
                }
            }
            DecayScope::AllSelected => {
                for cells in self.state.cells_by_aspect.values() {
                    for &(interval, slot) in cells {
                        let w = self.window(doc_interval, interval);
                        self.state.aspect[slot] *= decay_factor(w, interval.abs_diff(doc_interval));
                    }
                }
            }
        }

        let mut covered = vec![0usize; self.counts.len()];
        for item in &self.items {
            if shares_aspect(item.aspects, chosen_aspects) {
                covered[item.interval] += 1;
            }
        }
        match self.bursts {
            None => {
                for (i, t) in self.state.time.iter_mut().enumerate() {
                    if self.counts[i] > 0 {
                        *t *= 1.0 - covered[i] as f64 / self.counts[i] as f64;
                    }
                }
            }
            Some(bursts) => {
                let seg = bursts.burst_of(doc_interval);
                let range = seg.begin..seg.end + 1;
                let total: usize = self.counts[range.clone()].iter().sum();
                let hit: usize = covered[range.clone()].iter().sum();
                if total > 0 {
                    let factor = 1.0 - hit as f64 / total as f64;
                    for t in &mut self.state.time[range] {
                        *t *= factor;
                    }
                }
            }
        }
    }

    fn execute(mut self, k: usize, fingerprint: String) -> RankedList {
        let mut taken = vec![false; self.items.len()];
        let mut steps = Vec::with_capacity(k);
        while steps.len() < k {
            let Some((best, _)) = argmax(&self.items, &taken, |i| self.gain(i).0) else {
                break;
            };
            let (gain, aspect, time) = self.gain(best);
            taken[best] = true;
            steps.push(Step {
                doc: self.items[best].doc,
                gain,
                relevance: self.items[best].relevance,
                aspect_utility: aspect,
                time_utility: time,
            });
            self.select(best);
        }
        RankedList {
            algorithm: self.config.algorithm,
            fingerprint,
            steps,
        }
    }
}

fn run(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
    bursts: Option<&BurstSet>,
) -> Result<RankedList> {
    let k = prepare(candidates, config)?;
    let items = items(candidates, corpus);
    let state = UtilityState::new(&items, priors);
    let fingerprint = config.fingerprint();
    Ok(Run {
        items,
        counts: &priors.counts,
        bursts,
        state,
        config: *config,
    }
    .execute(k, fingerprint))
}

/// HistDiv: greedy selection maximizing
/// `alpha * V(d) + (1 - alpha) * (beta * sum_a U_aspect + (1 - beta) * U_time)`
/// with both utilities evaluated at the candidate's publication interval.
pub fn histdiv(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    run(candidates, priors, corpus, config, None)
}

/// HistDiv with burst-dependent aspect decay windows and segment-wide time
/// discounting.
pub fn histdiv_burst(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
) -> Result<RankedList> {
    run(candidates, priors, corpus, config, Some(&priors.bursts))
}

/// Greedy run exposing the residual state after every step (for tests and
/// inspection).
pub fn trace_states(
    candidates: &CandidateSet,
    priors: &PriorSet,
    corpus: &Corpus,
    config: &DiversifyConfig,
    burst_aware: bool,
) -> Result<Vec<UtilityState>> {
    let k = prepare(candidates, config)?;
    let items = items(candidates, corpus);
    let state = UtilityState::new(&items, priors);
    let mut run = Run {
        items,
        counts: &priors.counts,
        bursts: burst_aware.then_some(&priors.bursts),
        state,
        config: *config,
    };
    let mut taken = vec![false; run.items.len()];
    let mut states = vec![run.state.clone()];
    for _ in 0..k {
        let Some((best, _)) = argmax(&run.items, &taken, |i| run.gain(i).0) else {
            break;
        };
        taken[best] = true;
        run.select(best);
        states.push(run.state.clone());
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocumentRecord, Granularity, TemporalGrid};
    use crate::diversify::Algorithm;
    use crate::priors::{PriorConfig, Segment};

    #[test]
    fn sigmoid_anchor_values() {
        assert_eq!(decay_factor(1.0, 1), 0.5);
        assert_eq!(decay_factor(3.0, 3), 0.5);
        let expected = 1.0 - 1.0 / (1.0 + (-1.0f64).exp());
        assert!((decay_factor(1.0, 0) - expected).abs() < 1e-15);
        assert!((decay_factor(1.0, 0) - 0.26894).abs() < 1e-5);
        assert!(decay_factor(1.0, 30) > 0.999);
    }

    fn bursts_10_to_14() -> BurstSet {
        BurstSet {
            segments: vec![
                Segment { begin: 0, end: 9, bursty: false },
                Segment { begin: 10, end: 14, bursty: true },
                Segment { begin: 15, end: 19, bursty: false },
            ],
            window: 24,
            sigma: 1.0,
        }
    }

    #[test]
    fn burst_window_examples() {
        let b = bursts_10_to_14();
        assert_eq!(burst_window(12, 9, &b), 2.0);
        assert_eq!(burst_window(12, 15, &b), 2.0);
        // document at the burst start, cell before it: 0 floored to 1
        assert_eq!(burst_window(10, 9, &b), 1.0);
    }

    fn doc(id: &str, month: u32, aspects: &[&str]) -> DocumentRecord {
        DocumentRecord {
            id: id.into(),
            published: chrono::NaiveDate::from_ymd_opt(2000, month, 15).unwrap(),
            aspects: aspects.iter().map(|s| s.to_string()).collect(),
            temporal_refs: vec![],
            text: None,
        }
    }

    fn setup(records: Vec<DocumentRecord>) -> (Corpus, CandidateSet, PriorSet) {
        let grid = TemporalGrid::build("2000-01-01".parse().unwrap(), "2000-12-31".parse().unwrap(), Granularity::Month).unwrap();
        let corpus = Corpus::from_records(records, grid).unwrap();
        let n = corpus.len();
        let cands = CandidateSet::from_scores(vec![], (0..n).map(|i| (i, -(i as f64))).collect(), 1000);
        let priors = PriorSet::build(&cands, &corpus, &PriorConfig { theta: 1.0, burst_window: 4, burst_sigma: 1.0 }).unwrap();
        (corpus, cands, priors)
    }

    #[test]
    fn utilities_with_empty_selection_equal_priors() {
        let (corpus, cands, priors) = setup(vec![doc("a", 3, &["x"]), doc("b", 3, &["y"]), doc("c", 5, &["x"])]);
        let x = corpus.aspect_id("x").unwrap();
        assert_eq!(u_aspect(x, 2, &[], &corpus, &priors, 1.0), 0.5);
        assert_eq!(u_time(2, &[], &cands, &corpus, &priors), priors.temporal.get(2));
    }

    #[test]
    fn aspect_utility_at_distance_w() {
        let (corpus, _, priors) = setup(vec![doc("a", 3, &["x"]), doc("b", 4, &["x"])]);
        let x = corpus.aspect_id("x").unwrap();
        // doc "a" sits in interval 2, the cell in interval 3: distance 1 = w
        let u = u_aspect(x, 3, &[0], &corpus, &priors, 1.0);
        assert_eq!(u, 0.5 * priors.aspect.get(x, 3));
    }

    #[test]
    fn time_utility_shared_aspects() {
        // interval 2 holds four docs, two share an aspect with the selected doc
        let (corpus, cands, priors) = setup(vec![
            doc("a", 3, &["x"]),
            doc("b", 3, &["x", "z"]),
            doc("c", 3, &["y"]),
            doc("d", 3, &[]),
            doc("e", 6, &["x"]),
        ]);
        let e = corpus.index_of("e").unwrap();
        let u = u_time(2, &[e], &cands, &corpus, &priors);
        assert_eq!(u, 0.5 * priors.temporal.get(2));

        let (corpus, cands, priors) = setup(vec![doc("a", 3, &["x"]), doc("b", 3, &["x", "y"])]);
        assert_eq!(u_time(2, &[0], &cands, &corpus, &priors), 0.0);
    }

    #[test]
    fn incremental_state_matches_scratch_evaluation() {
        let (corpus, cands, priors) = setup(vec![
            doc("a", 1, &["x", "y"]),
            doc("b", 2, &["x"]),
            doc("c", 2, &["y", "z"]),
            doc("d", 4, &["z"]),
            doc("e", 4, &["x", "z"]),
            doc("f", 7, &["y"]),
        ]);
        let config = DiversifyConfig {
            alpha: 0.3,
            ..DiversifyConfig::new(Algorithm::HistDiv, 4)
        };
        let ranked = histdiv(&cands, &priors, &corpus, &config).unwrap();
        let states = trace_states(&cands, &priors, &corpus, &config, false).unwrap();
        let selected: Vec<usize> = ranked.docs().collect();
        for (step, state) in states.iter().enumerate() {
            let sel = &selected[..step];
            for name in ["x", "y", "z"] {
                let a = corpus.aspect_id(name).unwrap();
                for i in 0..12 {
                    if priors.aspect.get(a, i) > 0.0 {
                        let scratch = u_aspect(a, i, sel, &corpus, &priors, 1.0);
                        assert!((state.aspect(a, i) - scratch).abs() < 1e-15);
                    }
                }
            }
            for i in 0..12 {
                let scratch = u_time(i, sel, &cands, &corpus, &priors);
                assert!((state.time(i) - scratch).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn residuals_never_increase() {
        let (corpus, cands, priors) = setup(vec![
            doc("a", 1, &["x", "y"]),
            doc("b", 2, &["x"]),
            doc("c", 2, &["y", "z"]),
            doc("d", 4, &["z"]),
            doc("e", 9, &["x", "z"]),
        ]);
        for burst in [false, true] {
            let config = DiversifyConfig::new(Algorithm::HistDiv, 5);
            let states = trace_states(&cands, &priors, &corpus, &config, burst).unwrap();
            for pair in states.windows(2) {
                for (a, b) in pair[0].aspect_residuals().iter().zip(pair[1].aspect_residuals()) {
                    assert!(b <= a && *b >= 0.0);
                }
                for (a, b) in pair[0].time_residuals().iter().zip(pair[1].time_residuals()) {
                    assert!(b <= a && *b >= 0.0);
                }
            }
        }
    }

    #[test]
    fn alpha_one_is_relevance_order() {
        let (corpus, cands, priors) = setup(vec![doc("a", 1, &["x"]), doc("b", 1, &["x"]), doc("c", 9, &["y"])]);
        let config = DiversifyConfig {
            alpha: 1.0,
            ..DiversifyConfig::new(Algorithm::HistDiv, 3)
        };
        let ranked = histdiv(&cands, &priors, &corpus, &config).unwrap();
        assert_eq!(ranked.docs().collect::<Vec<_>>(), cands.docs().collect::<Vec<_>>());
    }

    #[test]
    fn first_pick_maximizes_prior_mixture() {
        let (corpus, cands, priors) = setup(vec![doc("a", 1, &["x"]), doc("b", 1, &["x"]), doc("c", 9, &["y", "z"])]);
        let config = DiversifyConfig {
            alpha: 0.2,
            beta: 0.5,
            ..DiversifyConfig::new(Algorithm::HistDiv, 1)
        };
        let ranked = histdiv(&cands, &priors, &corpus, &config).unwrap();
        let score = |d: usize| {
            let c = cands.entries().iter().find(|e| e.doc == d).unwrap();
            let i = corpus.interval_of_doc(d);
            let asum: f64 = corpus.document(d).aspects.iter().map(|&a| priors.aspect.get(a, i)).sum();
            0.2 * c.score + 0.8 * (0.5 * asum + 0.5 * priors.temporal.get(i))
        };
        let best = (0..3).max_by(|&a, &b| score(a).total_cmp(&score(b))).unwrap();
        assert_eq!(ranked.steps[0].doc, best);
        assert_eq!(ranked.len(), 1);
    }

    #[test]
    fn burst_discount_is_uniform_over_segment() {
        let (corpus, cands, priors) = setup(vec![
            doc("a", 1, &["x"]),
            doc("b", 2, &["x"]),
            doc("c", 2, &["y"]),
            doc("d", 3, &["y"]),
            doc("e", 10, &["z"]),
        ]);
        let config = DiversifyConfig::new(Algorithm::HistDivBurst, 1);
        let states = trace_states(&cands, &priors, &corpus, &config, true).unwrap();
        let chosen = histdiv_burst(&cands, &priors, &corpus, &config).unwrap().steps[0].doc;
        let seg = *priors.bursts.burst_of(corpus.interval_of_doc(chosen));
        let ratios: Vec<f64> = (seg.begin..=seg.end)
            .filter(|&i| states[0].time(i) > 0.0)
            .map(|i| states[1].time(i) / states[0].time(i))
            .collect();
        assert!(!ratios.is_empty());
        assert!(ratios.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));
        for i in 0..12 {
            if !seg.contains(i) {
                assert_eq!(states[1].time(i), states[0].time(i));
            }
        }
    }

    #[test]
    fn empty_candidates_rejected() {
        let (corpus, _, priors) = setup(vec![doc("a", 1, &["x"])]);
        let empty = CandidateSet::from_scores(vec![], vec![], 10);
        assert!(histdiv(&empty, &priors, &corpus, &DiversifyConfig::new(Algorithm::HistDiv, 1)).is_err());
    }

    #[test]
    fn oversized_k_returns_everything() {
        let (corpus, cands, priors) = setup(vec![doc("a", 1, &["x"]), doc("b", 2, &["y"])]);
        let ranked = histdiv(&cands, &priors, &corpus, &DiversifyConfig::new(Algorithm::HistDiv, 10)).unwrap();
        assert_eq!(ranked.len(), 2);
    }
}
