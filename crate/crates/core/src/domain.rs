//! Shared domain vocabulary: stations, zones, ISO weeks and open/closed status.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Oceanographic sampling station identifier (`V1`..`V7` in the default layout).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub String);

impl StationId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StationId {
    fn from(s: &str) -> Self {
        StationId(s.to_string())
    }
}

/// Mussel production area identifier (e.g. `CangasF`, `RedondelaC`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub String);

impl ZoneId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ZoneId {
    fn from(s: &str) -> Self {
        ZoneId(s.to_string())
    }
}

/// The twelve production areas of the default layout, outer estuary first.
pub const DEFAULT_ZONES: [&str; 12] = [
    "CangasF",
    "CangasG",
    "CangasH",
    "CangasC",
    "CangasD",
    "CangasE",
    "VigoA",
    "RedondelaA",
    "RedondelaB",
    "RedondelaC",
    "RedondelaD",
    "RedondelaE",
];

/// The seven sampling stations of the default layout.
pub const DEFAULT_STATIONS: [&str; 7] = ["V1", "V2", "V3", "V4", "V5", "V6", "V7"];

/// ISO-8601 year/week pair (Monday-start weeks, week 1..=53).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsoYearWeek {
    pub year: i32,
    pub week: u32,
}

impl IsoYearWeek {
    pub fn new(year: i32, week: u32) -> Option<Self> {
        let yw = IsoYearWeek { year, week };
        yw.monday().map(|_| yw)
    }

    /// Week containing `date` in the ISO calendar.
    pub fn from_date(date: NaiveDate) -> Self {
        let iw = date.iso_week();
        IsoYearWeek {
            year: iw.year(),
            week: iw.week(),
        }
    }

    /// Monday of this week; `None` when the week number is invalid for the year.
    pub fn monday(&self) -> Option<NaiveDate> {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Mon)
    }

    /// Friday of this week.
    pub fn friday(&self) -> Option<NaiveDate> {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Fri)
    }

    /// The following ISO week.
    pub fn next(&self) -> IsoYearWeek {
        let monday = self
            .monday()
            .expect("valid week by construction")
            .checked_add_days(chrono::Days::new(7))
            .expect("date in range");
        IsoYearWeek::from_date(monday)
    }

    /// Parse `"2016-W07"` style tokens.
    pub fn parse(token: &str) -> Option<Self> {
        let (y, w) = token.split_once("-W")?;
        let year: i32 = y.parse().ok()?;
        let week: u32 = w.parse().ok()?;
        IsoYearWeek::new(year, week)
    }
}

impl fmt::Display for IsoYearWeek {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.year, self.week)
    }
}

/// Open/closed state of a production area. Closures are the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZoneStatus {
    Open,
    Closed,
}

impl ZoneStatus {
    /// Numeric encoding used for the Friday-status feature: Open = 0, Closed = 1.
    pub fn encode(self) -> f64 {
        match self {
            ZoneStatus::Open => 0.0,
            ZoneStatus::Closed => 1.0,
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(self, ZoneStatus::Closed)
    }
}

impl fmt::Display for ZoneStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoneStatus::Open => f.write_str("OPEN"),
            ZoneStatus::Closed => f.write_str("CLOSED"),
        }
    }
}
