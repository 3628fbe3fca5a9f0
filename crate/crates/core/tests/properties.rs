use std::collections::HashSet;

use chrono::{Days, NaiveDate};
use proptest::prelude::*;

use histdiv_core::corpus::{Corpus, DocumentRecord, Granularity, TemporalGrid};
use histdiv_core::diversify::{diversify, Algorithm, DiversifyConfig};
use histdiv_core::metrics::{ia_metrics, randomization_test, sbr, IntentSpace, SpaceKind};
use histdiv_core::priors::{PriorConfig, PriorSet};
use histdiv_core::relevance::CandidateSet;

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..0.0, 1..40)
}

/// Documents as (day offset within 2001, aspect bitmask over 5 aspects).
fn docs() -> impl Strategy<Value = Vec<(u64, u8)>> {
    prop::collection::vec((0u64..365, 0u8..32), 1..25)
}

fn build(docs: &[(u64, u8)], raw: &[f64]) -> (Corpus, CandidateSet) {
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let grid = TemporalGrid::build(start, NaiveDate::from_ymd_opt(2001, 12, 31).unwrap(), Granularity::Month).unwrap();
    let records = docs
        .iter()
        .enumerate()
        .map(|(i, &(day, mask))| DocumentRecord {
            id: format!("d{i:02}"),
            published: start + Days::new(day),
            aspects: (0..5).filter(|b| mask & (1 << b) != 0).map(|b| format!("a{b}")).collect(),
            temporal_refs: vec![],
            text: None,
        })
        .collect();
    let corpus = Corpus::from_records(records, grid).unwrap();
    let scores = (0..docs.len()).map(|d| (d, raw[d % raw.len()])).collect();
    (corpus, CandidateSet::from_scores(vec!["q".into()], scores, 1000))
}

proptest! {
    #[test]
    fn top_k_is_prefix(raw in scores(), n in 1usize..40, m in 1usize..40) {
        let set = CandidateSet::from_scores(vec![], raw.into_iter().enumerate().collect(), 1000);
        let (n, m) = (n.min(m), n.max(m));
        let short: Vec<usize> = set.top_k(n).docs().collect();
        let long: Vec<usize> = set.top_k(m).docs().collect();
        prop_assert_eq!(&long[..short.len()], &short[..]);
    }

    #[test]
    fn normalization_preserves_order(raw in scores()) {
        let set = CandidateSet::from_scores(vec![], raw.into_iter().enumerate().collect(), 1000);
        for pair in set.entries().windows(2) {
            prop_assert!(pair[0].raw >= pair[1].raw);
            prop_assert!(pair[0].score >= pair[1].score);
            prop_assert!((0.0..=1.0).contains(&pair[1].score));
        }
    }

    #[test]
    fn rankings_are_duplicate_free_and_sized(
        docs in docs(),
        raw in scores(),
        k in 1usize..30,
        alpha in 0.0f64..=1.0,
        beta in 0.0f64..=1.0,
        algo in 0usize..12,
    ) {
        let (corpus, cands) = build(&docs, &raw);
        let priors = PriorSet::build(&cands, &corpus, &PriorConfig::for_granularity(Granularity::Month)).unwrap();
        let mut config = DiversifyConfig::new(Algorithm::ALL[algo], k);
        config.alpha = alpha;
        config.beta = beta;
        let ranked = diversify(&cands, &priors, &corpus, &config).unwrap();
        prop_assert_eq!(ranked.len(), k.min(cands.len()));
        let unique: HashSet<usize> = ranked.docs().collect();
        prop_assert_eq!(unique.len(), ranked.len());
    }

    #[test]
    fn histdiv_gains_never_increase_without_relevance(docs in docs(), raw in scores(), beta in 0.0f64..=1.0) {
        // with alpha = 0 the residual utilities only shrink, so each pick
        // is worth at most the previous one
        let (corpus, cands) = build(&docs, &raw);
        let priors = PriorSet::build(&cands, &corpus, &PriorConfig::for_granularity(Granularity::Month)).unwrap();
        let mut config = DiversifyConfig::new(Algorithm::HistDiv, 10);
        config.alpha = 0.0;
        config.beta = beta;
        let ranked = diversify(&cands, &priors, &corpus, &config).unwrap();
        for pair in ranked.steps.windows(2) {
            prop_assert!(pair[1].gain <= pair[0].gain + 1e-12);
        }
    }

    #[test]
    fn sbr_grows_with_depth(
        sets in prop::collection::vec(prop::collection::hash_set(0usize..12, 0..4), 1..5),
        run in Just((0..12).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let space = IntentSpace::uniform(
            SpaceKind::A,
            sets.iter()
                .enumerate()
                .map(|(i, s)| (format!("i{i}"), s.iter().map(|d| format!("d{d}")).collect()))
                .collect(),
        );
        let run: Vec<String> = run.iter().map(|d| format!("d{d}")).collect();
        let mut last = 0.0;
        for k in 1..=12 {
            if let Some(v) = sbr(&run, &space, k) {
                prop_assert!(v >= last && v <= 1.0);
                last = v;
                let m = ia_metrics(&run, &space, k, 0.5).unwrap();
                for x in [m.precision, m.err, m.alpha_ndcg, m.map] {
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&x));
                }
            }
        }
    }

    #[test]
    fn p_values_are_smoothed_probabilities(a in prop::collection::vec(0.0f64..1.0, 2..15), shift in -0.5f64..0.5) {
        let b: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let p = randomization_test(&a, &b, 1000, 1).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert_eq!(p, randomization_test(&b, &a, 1000, 1).unwrap());
    }
}
