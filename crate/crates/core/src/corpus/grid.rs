use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of one elementary time interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Month,
    Year,
}

impl Granularity {
    pub const ALL: [Granularity; 2] = [Granularity::Month, Granularity::Year];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Month => "month",
            Granularity::Year => "year",
        }
    }

    /// Ordinal of the calendar unit containing `date`, counted from year 0.
    fn ordinal(self, date: NaiveDate) -> i64 {
        match self {
            Granularity::Month => date.year() as i64 * 12 + date.month0() as i64,
            Granularity::Year => date.year() as i64,
        }
    }

    fn unit_start(self, ordinal: i64) -> NaiveDate {
        let date = match self {
            Granularity::Month => {
                NaiveDate::from_ymd_opt(ordinal.div_euclid(12) as i32, ordinal.rem_euclid(12) as u32 + 1, 1)
            }
            Granularity::Year => NaiveDate::from_ymd_opt(ordinal as i32, 1, 1),
        };
        date.expect("calendar unit start is a valid date")
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "month" => Ok(Granularity::Month),
            "year" => Ok(Granularity::Year),
            other => Err(Error::validation(format!(
                "unknown granularity {other:?}; expected month or year"
            ))),
        }
    }
}

/// A closed calendar interval `[begin, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeInterval {
    pub begin: NaiveDate,
    pub end: NaiveDate,
}

impl TimeInterval {
    pub fn new(begin: NaiveDate, end: NaiveDate) -> Result<Self> {
        if begin > end {
            return Err(Error::validation(format!(
                "interval begin {begin} is after end {end}"
            )));
        }
        Ok(TimeInterval { begin, end })
    }

    /// The whole calendar year `year`.
    pub fn year(year: i32) -> Option<Self> {
        Some(TimeInterval {
            begin: NaiveDate::from_ymd_opt(year, 1, 1)?,
            end: NaiveDate::from_ymd_opt(year, 12, 31)?,
        })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.begin <= date && date <= self.end
    }

    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        self.begin <= other.end && other.begin <= self.end
    }

    /// Intersection with `other`, if any.
    pub fn clip(&self, other: &TimeInterval) -> Option<TimeInterval> {
        let begin = self.begin.max(other.begin);
        let end = self.end.min(other.end);
        (begin <= end).then_some(TimeInterval { begin, end })
    }
}

/// Discretization of the collection timespan into calendar-aligned
/// elementary intervals of one granularity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalGrid {
    granularity: Granularity,
    span: TimeInterval,
    first_ordinal: i64,
    count: usize,
}

impl TemporalGrid {
    /// Grid covering `[begin, end]` with one interval per calendar unit
    /// intersecting the range.
    pub fn build(begin: NaiveDate, end: NaiveDate, granularity: Granularity) -> Result<Self> {
        if begin >= end {
            return Err(Error::validation(format!(
                "grid span begin {begin} must precede end {end}"
            )));
        }
        let first_ordinal = granularity.ordinal(begin);
        let count = (granularity.ordinal(end) - first_ordinal + 1) as usize;
        Ok(TemporalGrid {
            granularity,
            span: TimeInterval { begin, end },
            first_ordinal,
            count,
        })
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// The requested collection span (not calendar aligned).
    pub fn span(&self) -> TimeInterval {
        self.span
    }

    /// Start of the first elementary interval.
    pub fn origin(&self) -> NaiveDate {
        self.start(0)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Inclusive start date of interval `index` (may equal `len()` for the
    /// exclusive end boundary).
    pub fn start(&self, index: usize) -> NaiveDate {
        self.granularity
            .unit_start(self.first_ordinal + index as i64)
    }

    /// Interval `index` as a closed calendar interval.
    pub fn interval(&self, index: usize) -> TimeInterval {
        let begin = self.start(index);
        let end = self.start(index + 1).pred_opt().expect("date after origin");
        TimeInterval { begin, end }
    }

    pub fn intervals(&self) -> impl Iterator<Item = TimeInterval> + '_ {
        (0..self.count).map(|i| self.interval(i))
    }

    /// Covered calendar-aligned span `[origin, end of last interval]`.
    pub fn aligned_span(&self) -> TimeInterval {
        TimeInterval {
            begin: self.origin(),
            end: self.interval(self.count - 1).end,
        }
    }

    /// Index of the elementary interval containing `date`.
    pub fn interval_of(&self, date: NaiveDate) -> Result<usize> {
        let offset = self.granularity.ordinal(date) - self.first_ordinal;
        if offset < 0 || offset >= self.count as i64 {
            let span = self.aligned_span();
            return Err(Error::OutOfRange {
                date,
                begin: span.begin,
                end: span.end,
            });
        }
        Ok(offset as usize)
    }

    /// Indices of the elementary intervals overlapped by `interval`.
    pub fn overlapping(&self, interval: &TimeInterval) -> Range<usize> {
        let Some(clipped) = interval.clip(&self.aligned_span()) else {
            return 0..0;
        };
        let lo = self.granularity.ordinal(clipped.begin) - self.first_ordinal;
        let hi = self.granularity.ordinal(clipped.end) - self.first_ordinal;
        lo as usize..hi as usize + 1
    }

    /// Human readable label, `YYYY-MM` or `YYYY`.
    pub fn label(&self, index: usize) -> String {
        let start = self.start(index);
        match self.granularity {
            Granularity::Month => start.format("%Y-%m").to_string(),
            Granularity::Year => start.format("%Y").to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    /// Calendar months intersecting a range, by walking day by day.
    fn months_by_walking(begin: NaiveDate, end: NaiveDate) -> Vec<(i32, u32)> {
        let mut out: Vec<(i32, u32)> = Vec::new();
        let mut day = begin;
        while day <= end {
            let key = (day.year(), day.month());
            if out.last() != Some(&key) {
                out.push(key);
            }
            day = day.succ_opt().unwrap();
        }
        out
    }

    #[test]
    fn yearly_grid_over_archive_span() {
        let grid = TemporalGrid::build(d("1987-01-01"), d("2007-06-19"), Granularity::Year).unwrap();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid.interval(20), TimeInterval::year(2007).unwrap());
    }

    #[test]
    fn monthly_grid_one_year() {
        let grid = TemporalGrid::build(d("2000-01-01"), d("2000-12-31"), Granularity::Month).unwrap();
        assert_eq!(grid.len(), 12);
    }

    #[test]
    fn partial_months_at_both_ends() {
        let (b, e) = (d("1999-11-15"), d("2000-02-10"));
        let grid = TemporalGrid::build(b, e, Granularity::Month).unwrap();
        let expected = months_by_walking(b, e);
        assert_eq!(expected, vec![(1999, 11), (1999, 12), (2000, 1), (2000, 2)]);
        assert_eq!(grid.len(), expected.len());
        for (i, (y, m)) in expected.into_iter().enumerate() {
            assert_eq!(grid.start(i), NaiveDate::from_ymd_opt(y, m, 1).unwrap());
        }
        assert_eq!(grid.label(0), "1999-11");
    }

    #[test]
    fn inverted_range_rejected() {
        let err = TemporalGrid::build(d("2001-01-01"), d("2000-01-01"), Granularity::Year).unwrap_err();
        assert!(err.is_validation());
        assert!(TemporalGrid::build(d("2001-01-01"), d("2001-01-01"), Granularity::Year).is_err());
    }

    #[test]
    fn interval_of_examples() {
        let monthly = TemporalGrid::build(d("2000-01-01"), d("2000-12-31"), Granularity::Month).unwrap();
        assert_eq!(monthly.interval_of(d("2000-03-15")).unwrap(), 2);

        let yearly = TemporalGrid::build(d("1987-01-01"), d("2007-06-19"), Granularity::Year).unwrap();
        assert_eq!(yearly.interval_of(d("1989-11-07")).unwrap(), 2);

        let nov = TemporalGrid::build(d("1999-11-15"), d("2000-02-10"), Granularity::Month).unwrap();
        let p = d("2000-02-01");
        let scanned = (0..nov.len()).find(|&i| nov.interval(i).contains(p)).unwrap();
        assert_eq!(nov.interval_of(p).unwrap(), scanned);
        assert_eq!(scanned, 3);
    }

    #[test]
    fn out_of_span_date_is_range_error() {
        let grid = TemporalGrid::build(d("2000-01-01"), d("2000-12-31"), Granularity::Month).unwrap();
        assert!(matches!(grid.interval_of(d("1999-12-31")), Err(Error::OutOfRange { .. })));
        assert!(matches!(grid.interval_of(d("2001-01-01")), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn overlapping_ranges() {
        let grid = TemporalGrid::build(d("2000-01-01"), d("2000-12-31"), Granularity::Month).unwrap();
        let iv = TimeInterval::new(d("2000-02-20"), d("2000-04-02")).unwrap();
        assert_eq!(grid.overlapping(&iv), 1..4);
        let outside = TimeInterval::new(d("2003-01-01"), d("2003-02-01")).unwrap();
        assert!(grid.overlapping(&outside).is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn intervals_partition_the_span(offset in 0i64..7000, gran in prop::bool::ANY) {
                let granularity = if gran { Granularity::Month } else { Granularity::Year };
                let grid = TemporalGrid::build(d("1987-01-01"), d("2006-12-31"), granularity).unwrap();
                let date = d("1987-01-01") + chrono::Days::new(offset as u64);
                let hits: Vec<usize> = (0..grid.len()).filter(|&i| grid.interval(i).contains(date)).collect();
                prop_assert_eq!(hits.len(), 1);
                prop_assert_eq!(grid.interval_of(date).unwrap(), hits[0]);
                prop_assert_eq!(grid.interval_of(date).unwrap(), grid.interval_of(date).unwrap());
            }

            #[test]
            fn intervals_are_contiguous(gran in prop::bool::ANY) {
                let granularity = if gran { Granularity::Month } else { Granularity::Year };
                let grid = TemporalGrid::build(d("1990-05-05"), d("1995-03-03"), granularity).unwrap();
                for i in 1..grid.len() {
                    prop_assert_eq!(grid.interval(i - 1).end.succ_opt().unwrap(), grid.interval(i).begin);
                }
            }
        }
    }
}
