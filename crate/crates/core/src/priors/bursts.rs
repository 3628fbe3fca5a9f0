use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximal run of grid intervals sharing one burst tag. Bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub begin: usize,
    pub end: usize,
    pub bursty: bool,
}

impl Segment {
    pub fn contains(&self, index: usize) -> bool {
        self.begin <= index && index <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.begin + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Segmentation of the whole grid into alternating bursty and quiet runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstSet {
    pub segments: Vec<Segment>,
    pub window: usize,
    pub sigma: f64,
}

impl BurstSet {
    /// A single quiet segment over `len` intervals.
    pub fn quiet(len: usize) -> BurstSet {
        BurstSet {
            segments: vec![Segment {
                begin: 0,
                end: len.saturating_sub(1),
                bursty: false,
            }],
            window: len.max(2),
            sigma: 1.0,
        }
    }

    /// The segment containing `index`.
    pub fn burst_of(&self, index: usize) -> &Segment {
        let pos = self.segments.partition_point(|s| s.end < index);
        let seg = &self.segments[pos.min(self.segments.len() - 1)];
        debug_assert!(seg.contains(index), "index {index} outside grid");
        seg
    }

    pub fn bursts(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.bursty)
    }

    pub fn grid_len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.end + 1)
    }
}

/// Sliding-window burst detection.
///
/// Interval `i` is bursty iff `counts[i] > mean + sigma * stddev` over the
/// `window` intervals centred on `i`, clipped at the grid edges (population
/// standard deviation).
pub fn detect_bursts(counts: &[usize], window: usize, sigma: f64) -> Result<BurstSet> {
    if window < 2 {
        return Err(Error::validation(format!("burst window must be at least 2, got {window}")));
    }
    if counts.is_empty() {
        return Err(Error::validation("cannot detect bursts on an empty grid"));
    }
    let n = counts.len();
    let half = window / 2;
    let tags: Vec<bool> = (0..n)
        .map(|i| {
            // centred window, clipped (not shifted) at the edges
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(n);
            let slice = &counts[lo..hi];
            let len = slice.len() as f64;
            let mean = slice.iter().sum::<usize>() as f64 / len;
            let var = slice
                .iter()
                .map(|&c| (c as f64 - mean).powi(2))
                .sum::<f64>()
                / len;
            counts[i] as f64 > mean + sigma * var.sqrt()
        })
        .collect();

    let mut segments: Vec<Segment> = Vec::new();
    for (i, &bursty) in tags.iter().enumerate() {
        match segments.last_mut() {
            Some(s) if s.bursty == bursty => s.end = i,
            _ => segments.push(Segment {
                begin: i,
                end: i,
                bursty,
            }),
        }
    }
    Ok(BurstSet {
        segments,
        window,
        sigma,
    })
}
