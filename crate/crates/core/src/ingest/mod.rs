//! Parsing and validation of raw weekly monitoring records.
//!
//! Four CSV source families feed the pipeline: station profiles, daily
//! meteorology, daily upwelling indices and the zone closure history. All
//! files are UTF-8, comma-separated with `.` decimals; missing measurements
//! are empty cells and stay explicit in memory — nothing is imputed here.

mod csv_io;
mod validate;

pub use csv_io::{
    parse_meteo_csv, parse_station_csv, parse_upwelling_csv, parse_zone_status_csv,
    write_meteo_csv, write_station_csv, write_upwelling_csv, write_zone_status_csv,
};
pub use validate::{validate_dataset, Finding, ValidationReport};

use crate::domain::{IsoYearWeek, StationId, ZoneId, ZoneStatus};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// One depth-resolved probe measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSample {
    pub depth_m: f64,
    pub temperature_c: Option<f64>,
    pub salinity_psu: Option<f64>,
    pub oxygen_mgl: Option<f64>,
}

/// One week of raw measurements at one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationWeekRecord {
    pub station_id: StationId,
    pub iso_year_week: IsoYearWeek,
    pub profile: Vec<DepthSample>,
    pub chl_band_0_5: Option<f64>,
    pub chl_band_5_10: Option<f64>,
    pub chl_band_10_15: Option<f64>,
    pub dinophysis_cells: Option<f64>,
    pub ammonium: Option<f64>,
    pub phosphate: Option<f64>,
    pub nitrate: Option<f64>,
    pub nitrite: Option<f64>,
}

/// One day of estuary-wide meteorology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteoDay {
    pub date: NaiveDate,
    pub solar_irradiation: Option<f64>,
    pub sunshine_hours: Option<f64>,
    pub insolation: Option<f64>,
}

/// One day of upwelling index readings at 00/06/12/18 h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpwellingDay {
    pub date: NaiveDate,
    pub values: [Option<f64>; 4],
}

/// Official open/closed state of one zone on one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneStatusDay {
    pub zone_id: ZoneId,
    pub date: NaiveDate,
    pub status: ZoneStatus,
}

/// The assembled raw dataset, as persisted by `habgate ingest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub stations: Vec<StationId>,
    pub zones: Vec<ZoneId>,
    pub station_weeks: Vec<StationWeekRecord>,
    pub meteo: Vec<MeteoDay>,
    pub upwelling: Vec<UpwellingDay>,
    pub status: Vec<ZoneStatusDay>,
}

impl Dataset {
    pub fn save(&self, path: &Path) -> Result<(), IngestError> {
        let file = std::fs::File::create(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::to_writer(std::io::BufWriter::new(file), self).map_err(|e| {
            IngestError::Serialization {
                path: path.to_path_buf(),
                message: e.to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| {
            IngestError::Serialization {
                path: path.to_path_buf(),
                message: e.to_string(),
            }
        })
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: header mismatch, expected columns {expected:?}")]
    HeaderMismatch {
        path: PathBuf,
        expected: &'static [&'static str],
    },
    #[error("{path}:{line}: malformed value in column {column:?}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        column: &'static str,
        message: String,
    },
    #[error("{path}:{line}: unknown station {station:?}")]
    UnknownStation {
        path: PathBuf,
        line: usize,
        station: String,
    },
    #[error("{path}:{line}: unknown zone {zone:?}")]
    UnknownZone {
        path: PathBuf,
        line: usize,
        zone: String,
    },
    #[error("{path}: {message}")]
    Serialization { path: PathBuf, message: String },
}
