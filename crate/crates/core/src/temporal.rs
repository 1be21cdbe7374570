//! Partial ISO dates and the validity intervals attached to relationships.
//!
//! A partial date is `YYYY`, `YYYY-MM` or `YYYY-MM-DD`. It denotes a span of
//! days: a year covers Jan 1 through Dec 31, a month covers its first through
//! its last day. Interval tests compare those spans.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartialDate {
    year: u16,
    month: Option<u8>,
    day: Option<u8>,
}

/// A concrete calendar day, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

fn is_leap(year: u16) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

fn days_in_month(year: u16, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl PartialDate {
    pub fn year(year: u16) -> Result<Self> {
        Self::new(year, None, None)
    }

    pub fn month(year: u16, month: u8) -> Result<Self> {
        Self::new(year, Some(month), None)
    }

    pub fn day(year: u16, month: u8, day: u8) -> Result<Self> {
        Self::new(year, Some(month), Some(day))
    }

    fn new(year: u16, month: Option<u8>, day: Option<u8>) -> Result<Self> {
        if year > 9999 {
            return Err(Error::invalid(format!("year {year} out of range")));
        }
        if let Some(m) = month {
            if !(1..=12).contains(&m) {
                return Err(Error::invalid(format!("month {m} out of range")));
            }
        }
        if let Some(d) = day {
            let m = month.ok_or_else(|| Error::invalid("day given without month"))?;
            if d < 1 || d > days_in_month(year, m) {
                return Err(Error::invalid(format!(
                    "day {d} out of range for {year:04}-{m:02}"
                )));
            }
        }
        Ok(PartialDate { year, month, day })
    }

    pub fn year_part(&self) -> u16 {
        self.year
    }

    pub fn month_part(&self) -> Option<u8> {
        self.month
    }

    pub fn day_part(&self) -> Option<u8> {
        self.day
    }

    /// First day covered by this date.
    pub fn first_day(&self) -> Day {
        Day {
            year: self.year,
            month: self.month.unwrap_or(1),
            day: self.day.unwrap_or(1),
        }
    }

    /// Last day covered by this date.
    pub fn last_day(&self) -> Day {
        let month = self.month.unwrap_or(12);
        Day {
            year: self.year,
            month,
            day: self
                .day
                .unwrap_or_else(|| days_in_month(self.year, month)),
        }
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

impl FromStr for PartialDate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed date {s:?}, expected YYYY, YYYY-MM or YYYY-MM-DD"));
        let parts: Vec<&str> = s.split('-').collect();
        let digits = |p: &str, n: usize| p.len() == n && p.bytes().all(|b| b.is_ascii_digit());
        match parts.as_slice() {
            [y] if digits(y, 4) => PartialDate::year(y.parse().map_err(|_| bad())?),
            [y, m] if digits(y, 4) && digits(m, 2) => {
                PartialDate::month(y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
            }
            [y, m, d] if digits(y, 4) && digits(m, 2) && digits(d, 2) => PartialDate::day(
                y.parse().map_err(|_| bad())?,
                m.parse().map_err(|_| bad())?,
                d.parse().map_err(|_| bad())?,
            ),
            _ => Err(bad()),
        }
    }
}

impl Serialize for PartialDate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartialDate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Validity of a relationship. An absent start means valid since forever;
/// an absent end means still valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TemporalInterval {
    pub start: Option<PartialDate>,
    pub end: Option<PartialDate>,
}

impl TemporalInterval {
    pub const UNBOUNDED: TemporalInterval = TemporalInterval {
        start: None,
        end: None,
    };

    pub fn new(start: Option<PartialDate>, end: Option<PartialDate>) -> Result<Self> {
        let interval = TemporalInterval { start, end };
        interval.check()?;
        Ok(interval)
    }

    pub fn since(start: PartialDate) -> Self {
        TemporalInterval {
            start: Some(start),
            end: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s.first_day().cmp(&e.last_day()) == Ordering::Greater {
                return Err(Error::invalid(format!("interval start {s} is after end {e}")));
            }
        }
        Ok(())
    }

    /// Whether the interval overlaps the span of days denoted by `t`.
    pub fn is_valid_at(&self, t: PartialDate) -> bool {
        let started = self
            .start
            .is_none_or(|s| s.first_day() <= t.last_day());
        let not_ended = self.end.is_none_or(|e| t.first_day() <= e.last_day());
        started && not_ended
    }
}

impl fmt::Display for TemporalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |d: Option<PartialDate>| d.map_or_else(|| "-".to_string(), |d| d.to_string());
        write!(f, "[{}, {}]", show(self.start), show(self.end))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> PartialDate {
        s.parse().unwrap()
    }

    fn iv(s: Option<&str>, e: Option<&str>) -> TemporalInterval {
        TemporalInterval::new(s.map(d), e.map(d)).unwrap()
    }

    #[test]
    fn parses_all_three_granularities() {
        assert_eq!(d("2018").to_string(), "2018");
        assert_eq!(d("2018-06").to_string(), "2018-06");
        assert_eq!(d("2020-02-29").to_string(), "2020-02-29");
    }

    #[test]
    fn rejects_malformed_dates() {
        for bad in ["", "18", "2018-6", "2018-13", "2019-02-29", "2018-06-31", "abcd", "2018-06-01-02", "2018/06"] {
            assert!(bad.parse::<PartialDate>().is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn normalization_spans() {
        assert_eq!(d("2018").last_day(), Day { year: 2018, month: 12, day: 31 });
        assert_eq!(d("2019-02").last_day(), Day { year: 2019, month: 2, day: 28 });
        assert_eq!(d("2000-02").last_day(), Day { year: 2000, month: 2, day: 29 });
        assert_eq!(d("1900-02").last_day(), Day { year: 1900, month: 2, day: 28 });
        assert_eq!(d("2018-06").first_day(), Day { year: 2018, month: 6, day: 1 });
    }

    #[test]
    fn since_2018_still_current() {
        assert!(iv(Some("2018"), None).is_valid_at(d("2021")));
    }

    #[test]
    fn unbounded_is_always_valid() {
        for t in ["0001", "2018-06", "9999-12-31"] {
            assert!(TemporalInterval::UNBOUNDED.is_valid_at(d(t)));
        }
    }

    #[test]
    fn closed_interval_edges() {
        let i = iv(Some("2014"), Some("2018"));
        assert!(i.is_valid_at(d("2018-06")));
        assert!(!i.is_valid_at(d("2019-01")));
        assert!(i.is_valid_at(d("2014-01-01")));
        assert!(!i.is_valid_at(d("2013-12-31")));
        // the year 2013 ends before 2014 starts
        assert!(!i.is_valid_at(d("2013")));
    }

    #[test]
    fn start_after_end_is_rejected() {
        assert!(TemporalInterval::new(Some(d("2018")), Some(d("2010"))).is_err());
        // same year at different granularity overlaps
        assert!(TemporalInterval::new(Some(d("2018-06")), Some(d("2018"))).is_ok());
        assert!(TemporalInterval::new(Some(d("2018")), Some(d("2018-01-01"))).is_ok());
    }
}
