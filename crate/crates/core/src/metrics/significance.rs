use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Minimum number of random relabelings accepted by [`randomization_test`].
pub const MIN_ITERATIONS: usize = 1000;
pub const DEFAULT_ITERATIONS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WinLoss {
    pub wins: usize,
    pub losses: usize,
    pub topics: usize,
}

impl WinLoss {
    pub fn win_pct(&self) -> f64 {
        pct(self.wins, self.topics)
    }

    pub fn loss_pct(&self) -> f64 {
        pct(self.losses, self.topics)
    }
}

fn pct(n: usize, of: usize) -> f64 {
    if of == 0 {
        0.0
    } else {
        100.0 * n as f64 / of as f64
    }
}

/// Per-topic comparison of `run` against `baseline`; ties count for neither.
pub fn win_loss(run: &BTreeMap<String, f64>, baseline: &BTreeMap<String, f64>) -> Result<WinLoss> {
    if run.len() != baseline.len() || run.keys().any(|t| !baseline.contains_key(t)) {
        return Err(Error::validation("win/loss needs both runs to cover the same topics"));
    }
    let mut wl = WinLoss {
        topics: run.len(),
        ..WinLoss::default()
    };
    for (topic, &a) in run {
        let b = baseline[topic];
        if a > b {
            wl.wins += 1;
        } else if a < b {
            wl.losses += 1;
        }
    }
    Ok(wl)
}

/// Two-sided paired randomization test on per-topic scores.
///
/// Each iteration flips the sign of every paired difference with probability
/// one half and counts relabelings whose absolute mean difference reaches the
/// observed one.
pub fn randomization_test(a: &[f64], b: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    let diffs = paired_diffs(a, b)?;
    if iterations < MIN_ITERATIONS {
        return Err(Error::validation(format!(
            "randomization test needs at least {MIN_ITERATIONS} iterations, got {iterations}"
        )));
    }
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0usize;
    for _ in 0..iterations {
        let s: f64 = diffs
            .iter()
            .map(|&d| if rng.random::<bool>() { d } else { -d })
            .sum();
        if (s / n).abs() >= observed - EPS {
            count += 1;
        }
    }
    Ok((count + 1) as f64 / (iterations + 1) as f64)
}

fn paired_diffs(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "paired scores differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::validation("randomization test needs at least 2 topics"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}
