//! Dataset-level consistency checks: duplicates, date gaps and coverage.

use super::Dataset;
use crate::domain::{IsoYearWeek, StationId, ZoneId};
use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One validation finding. Findings do not abort the pipeline; they are
/// reported and drive the CLI's exit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Finding {
    DuplicateStationWeek { station: StationId, week: IsoYearWeek },
    MissingStationWeek { station: StationId, week: IsoYearWeek },
    MissingMeteoDay { date: NaiveDate },
    MissingUpwellingDay { date: NaiveDate },
    MissingStatusDay { zone: ZoneId, date: NaiveDate },
    DuplicateStatusDay { zone: ZoneId, date: NaiveDate },
}

/// Per-source record counts and date spans.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub station_weeks: usize,
    pub meteo_days: usize,
    pub upwelling_days: usize,
    pub status_days: usize,
    pub first_week: Option<IsoYearWeek>,
    pub last_week: Option<IsoYearWeek>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub coverage: Coverage,
}

impl ValidationReport {
    pub fn has_findings(&self) -> bool {
        !self.findings.is_empty()
    }
}

/// Check the dataset for duplicate (station, week) pairs, weekly/daily date
/// gaps within each source's own span, and summarize coverage.
pub fn validate_dataset(dataset: &Dataset) -> ValidationReport {
    let mut findings = Vec::new();

    // Station records: duplicates, then per-station weekly gaps.
    let mut by_station: BTreeMap<&StationId, Vec<IsoYearWeek>> = BTreeMap::new();
    for rec in &dataset.station_weeks {
        by_station.entry(&rec.station_id).or_default().push(rec.iso_year_week);
    }
    for (station, weeks) in &by_station {
        let mut seen = BTreeSet::new();
        for &week in weeks {
            if !seen.insert(week) {
                findings.push(Finding::DuplicateStationWeek {
                    station: (*station).clone(),
                    week,
                });
            }
        }
        if let (Some(&first), Some(&last)) = (seen.iter().next(), seen.iter().next_back()) {
            let mut w = first;
            while w < last {
                w = w.next();
                if w < last && !seen.contains(&w) {
                    findings.push(Finding::MissingStationWeek {
                        station: (*station).clone(),
                        week: w,
                    });
                }
            }
        }
    }

    // Daily sources: gaps between min and max date.
    let meteo_dates: BTreeSet<NaiveDate> = dataset.meteo.iter().map(|d| d.date).collect();
    for date in missing_days(&meteo_dates) {
        findings.push(Finding::MissingMeteoDay { date });
    }
    let up_dates: BTreeSet<NaiveDate> = dataset.upwelling.iter().map(|d| d.date).collect();
    for date in missing_days(&up_dates) {
        findings.push(Finding::MissingUpwellingDay { date });
    }

    // Status history: duplicates and missing days per zone. Missing Mondays
    // matter most (they carry the label), so any gap on a Monday is reported
    // even when the zone's history is otherwise sparse.
    let mut by_zone: BTreeMap<&ZoneId, BTreeSet<NaiveDate>> = BTreeMap::new();
    for day in &dataset.status {
        if !by_zone.entry(&day.zone_id).or_default().insert(day.date) {
            findings.push(Finding::DuplicateStatusDay {
                zone: day.zone_id.clone(),
                date: day.date,
            });
        }
    }
    for (zone, dates) in &by_zone {
        for date in missing_days(dates) {
            if date.weekday() == Weekday::Mon {
                findings.push(Finding::MissingStatusDay {
                    zone: (*zone).clone(),
                    date,
                });
            }
        }
    }

    let all_weeks: BTreeSet<IsoYearWeek> =
        dataset.station_weeks.iter().map(|r| r.iso_year_week).collect();
    ValidationReport {
        findings,
        coverage: Coverage {
            station_weeks: dataset.station_weeks.len(),
            meteo_days: dataset.meteo.len(),
            upwelling_days: dataset.upwelling.len(),
            status_days: dataset.status.len(),
            first_week: all_weeks.iter().next().copied(),
            last_week: all_weeks.iter().next_back().copied(),
        },
    }
}

fn missing_days(dates: &BTreeSet<NaiveDate>) -> Vec<NaiveDate> {
    let mut missing = Vec::new();
    if let (Some(&first), Some(&last)) = (dates.iter().next(), dates.iter().next_back()) {
        let mut d = first;
        while d < last {
            d = d.checked_add_days(Days::new(1)).expect("date in range");
            if d < last && !dates.contains(&d) {
                missing.push(d);
            }
        }
    }
    missing
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{StationWeekRecord, ZoneStatusDay};
    use crate::domain::ZoneStatus;

    fn record(station: &str, year: i32, week: u32) -> StationWeekRecord {
        StationWeekRecord {
            station_id: StationId::from(station),
            iso_year_week: IsoYearWeek::new(year, week).unwrap(),
            profile: Vec::new(),
            chl_band_0_5: None,
            chl_band_5_10: None,
            chl_band_10_15: None,
            dinophysis_cells: None,
            ammonium: None,
            phosphate: None,
            nitrate: None,
            nitrite: None,
        }
    }

    fn empty_dataset() -> Dataset {
        Dataset {
            stations: vec![StationId::from("V1")],
            zones: vec![ZoneId::from("VigoA")],
            station_weeks: Vec::new(),
            meteo: Vec::new(),
            upwelling: Vec::new(),
            status: Vec::new(),
        }
    }

    #[test]
    fn duplicate_station_week_flagged() {
        let mut ds = empty_dataset();
        ds.station_weeks = vec![record("V1", 2010, 3), record("V1", 2010, 3)];
        let report = validate_dataset(&ds);
        assert_eq!(
            report.findings,
            vec![Finding::DuplicateStationWeek {
                station: StationId::from("V1"),
                week: IsoYearWeek { year: 2010, week: 3 },
            }]
        );
    }

    #[test]
    fn contiguous_weeks_have_no_gap_findings() {
        let mut ds = empty_dataset();
        let mut week = IsoYearWeek { year: 2004, week: 1 };
        for _ in 0..783 {
            ds.station_weeks.push(StationWeekRecord {
                iso_year_week: week,
                ..record("V1", 2004, 1)
            });
            week = week.next();
        }
        let report = validate_dataset(&ds);
        assert!(!report.has_findings());
        assert_eq!(report.coverage.station_weeks, 783);
        assert_eq!(report.coverage.first_week, Some(IsoYearWeek { year: 2004, week: 1 }));
        assert_eq!(report.coverage.last_week, Some(IsoYearWeek { year: 2018, week: 52 }));
    }

    #[test]
    fn skipped_week_reported() {
        let mut ds = empty_dataset();
        ds.station_weeks = vec![record("V1", 2010, 3), record("V1", 2010, 5)];
        let report = validate_dataset(&ds);
        assert_eq!(
            report.findings,
            vec![Finding::MissingStationWeek {
                station: StationId::from("V1"),
                week: IsoYearWeek { year: 2010, week: 4 },
            }]
        );
    }

    #[test]
    fn missing_monday_in_status_history_named() {
        let mut ds = empty_dataset();
        let zone = ZoneId::from("VigoA");
        // 2016-02-01 (Mon) .. 2016-02-15 (Mon) with 2016-02-08 (Mon) absent
        // and a few weekday gaps that are not Mondays.
        for day in [1u32, 2, 3, 4, 5, 6, 7, 9, 10, 12, 13, 14, 15] {
            ds.status.push(ZoneStatusDay {
                zone_id: zone.clone(),
                date: NaiveDate::from_ymd_opt(2016, 2, day).unwrap(),
                status: ZoneStatus::Open,
            });
        }
        let report = validate_dataset(&ds);
        assert_eq!(
            report.findings,
            vec![Finding::MissingStatusDay {
                zone: zone.clone(),
                date: NaiveDate::from_ymd_opt(2016, 2, 8).unwrap(),
            }]
        );
    }
}
