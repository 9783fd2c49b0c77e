//! Per-record feature engineering rules.

use super::PreprocessError;
use crate::domain::{IsoYearWeek, ZoneId, ZoneStatus};
use crate::ingest::{DepthSample, MeteoDay, StationWeekRecord, UpwellingDay, ZoneStatusDay};

/// Depth-profile measurement selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileField {
    Temperature,
    Salinity,
    Oxygen,
}

impl ProfileField {
    fn get(self, sample: &DepthSample) -> Option<f64> {
        match self {
            ProfileField::Temperature => sample.temperature_c,
            ProfileField::Salinity => sample.salinity_psu,
            ProfileField::Oxygen => sample.oxygen_mgl,
        }
    }
}

/// Meteorological daily selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeteoField {
    SolarIrradiation,
    SunshineHours,
    Insolation,
}

impl MeteoField {
    fn get(self, day: &MeteoDay) -> Option<f64> {
        match self {
            MeteoField::SolarIrradiation => day.solar_irradiation,
            MeteoField::SunshineHours => day.sunshine_hours,
            MeteoField::Insolation => day.insolation,
        }
    }
}

/// Weekly chlorophyll: the maximum across the three depth bands. Toxicity
/// anywhere on the rope closes the area, so the worst band wins.
pub fn chlorophyll_weekly(record: &StationWeekRecord) -> Result<f64, PreprocessError> {
    [record.chl_band_0_5, record.chl_band_5_10, record.chl_band_10_15]
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(PreprocessError::AllMissing { what: "chlorophyll bands" })
}

/// Mean of the present values measured at depths up to 12 m (the length of
/// the mussel ropes); deeper samples are ignored.
pub fn column_mean_0_12(
    profile: &[DepthSample],
    field: ProfileField,
) -> Result<f64, PreprocessError> {
    mean_where(profile, field, |d| d <= 12.0)
        .ok_or(PreprocessError::AllMissing { what: "profile values at <= 12 m" })
}

/// Stratification differential: mean over the first 6 m minus the mean over
/// the following 6 m. Positive temperature values indicate a thermocline.
pub fn stratification_differential(
    profile: &[DepthSample],
    field: ProfileField,
) -> Result<f64, PreprocessError> {
    let upper = mean_where(profile, field, |d| d <= 6.0)
        .ok_or(PreprocessError::BandMissing { band: "0-6 m" })?;
    let lower = mean_where(profile, field, |d| d > 6.0 && d <= 12.0)
        .ok_or(PreprocessError::BandMissing { band: "6-12 m" })?;
    Ok(upper - lower)
}

fn mean_where(
    profile: &[DepthSample],
    field: ProfileField,
    in_band: impl Fn(f64) -> bool,
) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for sample in profile {
        if in_band(sample.depth_m) {
            if let Some(v) = field.get(sample) {
                sum += v;
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Weekly mean of one daily meteorological series over the given ISO week.
pub fn weekly_mean_meteo(
    days: &[MeteoDay],
    week: IsoYearWeek,
    field: MeteoField,
) -> Result<f64, PreprocessError> {
    let values = days
        .iter()
        .filter(|d| IsoYearWeek::from_date(d.date) == week)
        .filter_map(|d| field.get(d));
    mean_of(values).ok_or(PreprocessError::AllMissing { what: "meteo readings in week" })
}

/// Weekly mean upwelling: the four sub-daily readings of every day in the
/// week are pooled before averaging.
pub fn weekly_mean_upwelling(
    days: &[UpwellingDay],
    week: IsoYearWeek,
) -> Result<f64, PreprocessError> {
    let values = days
        .iter()
        .filter(|d| IsoYearWeek::from_date(d.date) == week)
        .flat_map(|d| d.values.iter().flatten().copied());
    mean_of(values).ok_or(PreprocessError::AllMissing { what: "upwelling readings in week" })
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Seasonality feature: the ISO week number (1..=53).
pub fn seasonality(week: IsoYearWeek) -> u32 {
    week.week
}

/// Label for a feature week: the zone's status on the Monday of the
/// following week.
pub fn monday_label(
    status_history: &[ZoneStatusDay],
    zone: &ZoneId,
    week: IsoYearWeek,
) -> Result<ZoneStatus, PreprocessError> {
    let monday = week.next().monday().expect("valid week");
    status_history
        .iter()
        .find(|d| d.zone_id == *zone && d.date == monday)
        .map(|d| d.status)
        .ok_or_else(|| PreprocessError::LabelMissing {
            zone: zone.to_string(),
            monday: monday.to_string(),
        })
}

/// The zone's recorded status on the Friday of the feature week, if any.
pub fn friday_status(
    status_history: &[ZoneStatusDay],
    zone: &ZoneId,
    week: IsoYearWeek,
) -> Option<ZoneStatus> {
    let friday = week.friday().expect("valid week");
    status_history
        .iter()
        .find(|d| d.zone_id == *zone && d.date == friday)
        .map(|d| d.status)
}
