//! Readers and writers for the four CSV source schemas.
//!
//! Station profiles pack the depth-resolved probe samples into a single
//! `profile` cell: `;`-separated samples, each `depth:temperature:salinity:
//! oxygen` with empty components for missing readings. Every other column
//! holds one value, empty when the measurement is missing.

use super::{
    DepthSample, IngestError, MeteoDay, StationWeekRecord, UpwellingDay, ZoneStatusDay,
};
use crate::domain::{IsoYearWeek, StationId, ZoneId, ZoneStatus};
use chrono::NaiveDate;
use std::path::Path;

pub const STATION_HEADER: [&str; 11] = [
    "station",
    "year_week",
    "profile",
    "chl_0_5",
    "chl_5_10",
    "chl_10_15",
    "dinophysis_cells",
    "ammonium",
    "phosphate",
    "nitrate",
    "nitrite",
];
pub const METEO_HEADER: [&str; 4] = ["date", "solar_irradiation", "sunshine_hours", "insolation"];
pub const UPWELLING_HEADER: [&str; 5] = [
    "date",
    "upwelling_00h",
    "upwelling_06h",
    "upwelling_12h",
    "upwelling_18h",
];
pub const STATUS_HEADER: [&str; 3] = ["zone", "date", "status"];

struct RowCtx<'a> {
    path: &'a Path,
    line: usize,
}

impl<'a> RowCtx<'a> {
    fn malformed(&self, column: &'static str, message: impl Into<String>) -> IngestError {
        IngestError::MalformedRow {
            path: self.path.to_path_buf(),
            line: self.line,
            column,
            message: message.into(),
        }
    }

    /// Empty cell -> None; anything else must parse as a finite float.
    fn opt_f64(&self, cell: &str, column: &'static str) -> Result<Option<f64>, IngestError> {
        let cell = cell.trim();
        if cell.is_empty() {
            return Ok(None);
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| self.malformed(column, format!("{cell:?} is not a number")))?;
        if !v.is_finite() {
            return Err(self.malformed(column, "non-finite value"));
        }
        Ok(Some(v))
    }

    fn date(&self, cell: &str, column: &'static str) -> Result<NaiveDate, IngestError> {
        NaiveDate::parse_from_str(cell.trim(), "%Y-%m-%d")
            .map_err(|_| self.malformed(column, format!("{cell:?} is not a YYYY-MM-DD date")))
    }
}

fn open_reader(
    path: &Path,
    expected: &'static [&'static str],
) -> Result<csv::Reader<std::fs::File>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(file);
    let headers = reader.headers().map_err(|e| IngestError::Serialization {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(IngestError::HeaderMismatch {
            path: path.to_path_buf(),
            expected,
        });
    }
    Ok(reader)
}

fn read_rows(
    path: &Path,
    expected: &'static [&'static str],
) -> Result<Vec<(usize, csv::StringRecord)>, IngestError> {
    let mut reader = open_reader(path, expected)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let rec = rec.map_err(|e| IngestError::MalformedRow {
            path: path.to_path_buf(),
            line,
            column: "<row>",
            message: e.to_string(),
        })?;
        rows.push((line, rec));
    }
    Ok(rows)
}

/// Parse the station-profile file. `declared` is the allowed station set.
pub fn parse_station_csv(
    path: &Path,
    declared: &[StationId],
) -> Result<Vec<StationWeekRecord>, IngestError> {
    let mut out = Vec::new();
    for (line, rec) in read_rows(path, &STATION_HEADER)? {
        let ctx = RowCtx { path, line };
        let station = rec[0].trim();
        if !declared.iter().any(|s| s.as_str() == station) {
            return Err(IngestError::UnknownStation {
                path: path.to_path_buf(),
                line,
                station: station.to_string(),
            });
        }
        let week = IsoYearWeek::parse(rec[1].trim())
            .ok_or_else(|| ctx.malformed("year_week", format!("{:?} is not an ISO week", &rec[1])))?;
        let profile = parse_profile(&ctx, rec[2].trim())?;
        let dinophysis = ctx.opt_f64(&rec[6], "dinophysis_cells")?;
        if let Some(v) = dinophysis {
            if v < 0.0 {
                return Err(ctx.malformed("dinophysis_cells", "cell count must be >= 0"));
            }
        }
        out.push(StationWeekRecord {
            station_id: StationId(station.to_string()),
            iso_year_week: week,
            profile,
            chl_band_0_5: ctx.opt_f64(&rec[3], "chl_0_5")?,
            chl_band_5_10: ctx.opt_f64(&rec[4], "chl_5_10")?,
            chl_band_10_15: ctx.opt_f64(&rec[5], "chl_10_15")?,
            dinophysis_cells: dinophysis,
            ammonium: ctx.opt_f64(&rec[7], "ammonium")?,
            phosphate: ctx.opt_f64(&rec[8], "phosphate")?,
            nitrate: ctx.opt_f64(&rec[9], "nitrate")?,
            nitrite: ctx.opt_f64(&rec[10], "nitrite")?,
        });
    }
    Ok(out)
}

fn parse_profile(ctx: &RowCtx, cell: &str) -> Result<Vec<DepthSample>, IngestError> {
    if cell.is_empty() {
        return Ok(Vec::new());
    }
    let mut profile = Vec::new();
    for sample in cell.split(';') {
        let parts: Vec<&str> = sample.split(':').collect();
        if parts.len() != 4 {
            return Err(ctx.malformed(
                "profile",
                format!("sample {sample:?} must be depth:temperature:salinity:oxygen"),
            ));
        }
        let depth: f64 = parts[0]
            .parse()
            .map_err(|_| ctx.malformed("profile", format!("bad depth {:?}", parts[0])))?;
        if !depth.is_finite() || depth < 0.0 {
            return Err(ctx.malformed("profile", format!("depth {depth} must be >= 0")));
        }
        let field = |idx: usize| -> Result<Option<f64>, IngestError> {
            let s = parts[idx].trim();
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 = s
                .parse()
                .map_err(|_| ctx.malformed("profile", format!("bad value {s:?}")))?;
            if !v.is_finite() {
                return Err(ctx.malformed("profile", "non-finite value"));
            }
            Ok(Some(v))
        };
        profile.push(DepthSample {
            depth_m: depth,
            temperature_c: field(1)?,
            salinity_psu: field(2)?,
            oxygen_mgl: field(3)?,
        });
    }
    Ok(profile)
}

pub fn parse_meteo_csv(path: &Path) -> Result<Vec<MeteoDay>, IngestError> {
    let mut out = Vec::new();
    for (line, rec) in read_rows(path, &METEO_HEADER)? {
        let ctx = RowCtx { path, line };
        out.push(MeteoDay {
            date: ctx.date(&rec[0], "date")?,
            solar_irradiation: ctx.opt_f64(&rec[1], "solar_irradiation")?,
            sunshine_hours: ctx.opt_f64(&rec[2], "sunshine_hours")?,
            insolation: ctx.opt_f64(&rec[3], "insolation")?,
        });
    }
    Ok(out)
}

pub fn parse_upwelling_csv(path: &Path) -> Result<Vec<UpwellingDay>, IngestError> {
    let mut out = Vec::new();
    for (line, rec) in read_rows(path, &UPWELLING_HEADER)? {
        let ctx = RowCtx { path, line };
        out.push(UpwellingDay {
            date: ctx.date(&rec[0], "date")?,
            values: [
                ctx.opt_f64(&rec[1], "upwelling_00h")?,
                ctx.opt_f64(&rec[2], "upwelling_06h")?,
                ctx.opt_f64(&rec[3], "upwelling_12h")?,
                ctx.opt_f64(&rec[4], "upwelling_18h")?,
            ],
        });
    }
    Ok(out)
}

/// Parse the closure-history file. Status tokens are trimmed and matched
/// case-insensitively against exactly {OPEN, CLOSED}.
pub fn parse_zone_status_csv(
    path: &Path,
    declared_zones: &[ZoneId],
) -> Result<Vec<ZoneStatusDay>, IngestError> {
    let mut out = Vec::new();
    for (line, rec) in read_rows(path, &STATUS_HEADER)? {
        let ctx = RowCtx { path, line };
        let zone = rec[0].trim();
        if !declared_zones.iter().any(|z| z.as_str() == zone) {
            return Err(IngestError::UnknownZone {
                path: path.to_path_buf(),
                line,
                zone: zone.to_string(),
            });
        }
        let date = ctx.date(&rec[1], "date")?;
        let status = match rec[2].trim().to_ascii_uppercase().as_str() {
            "OPEN" => ZoneStatus::Open,
            "CLOSED" => ZoneStatus::Closed,
            other => {
                return Err(ctx.malformed("status", format!("{other:?} is not OPEN or CLOSED")))
            }
        };
        out.push(ZoneStatusDay {
            zone_id: ZoneId(zone.to_string()),
            date,
            status,
        });
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn create_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, IngestError> {
    let file = std::fs::File::create(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> IngestError + '_ {
    move |e| IngestError::Serialization {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_station_csv(path: &Path, records: &[StationWeekRecord]) -> Result<(), IngestError> {
    let mut w = create_writer(path)?;
    let err = write_err(path);
    w.write_record(STATION_HEADER).map_err(&err)?;
    for r in records {
        let profile = r
            .profile
            .iter()
            .map(|s| {
                format!(
                    "{}:{}:{}:{}",
                    s.depth_m,
                    fmt_opt(s.temperature_c),
                    fmt_opt(s.salinity_psu),
                    fmt_opt(s.oxygen_mgl)
                )
            })
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.station_id.as_str().to_string(),
            r.iso_year_week.to_string(),
            profile,
            fmt_opt(r.chl_band_0_5),
            fmt_opt(r.chl_band_5_10),
            fmt_opt(r.chl_band_10_15),
            fmt_opt(r.dinophysis_cells),
            fmt_opt(r.ammonium),
            fmt_opt(r.phosphate),
            fmt_opt(r.nitrate),
            fmt_opt(r.nitrite),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_meteo_csv(path: &Path, days: &[MeteoDay]) -> Result<(), IngestError> {
    let mut w = create_writer(path)?;
    let err = write_err(path);
    w.write_record(METEO_HEADER).map_err(&err)?;
    for d in days {
        w.write_record([
            d.date.format("%Y-%m-%d").to_string(),
            fmt_opt(d.solar_irradiation),
            fmt_opt(d.sunshine_hours),
            fmt_opt(d.insolation),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_upwelling_csv(path: &Path, days: &[UpwellingDay]) -> Result<(), IngestError> {
    let mut w = create_writer(path)?;
    let err = write_err(path);
    w.write_record(UPWELLING_HEADER).map_err(&err)?;
    for d in days {
        w.write_record([
            d.date.format("%Y-%m-%d").to_string(),
            fmt_opt(d.values[0]),
            fmt_opt(d.values[1]),
            fmt_opt(d.values[2]),
            fmt_opt(d.values[3]),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_zone_status_csv(path: &Path, days: &[ZoneStatusDay]) -> Result<(), IngestError> {
    let mut w = create_writer(path)?;
    let err = write_err(path);
    w.write_record(STATUS_HEADER).map_err(&err)?;
    for d in days {
        w.write_record([
            d.zone_id.as_str().to_string(),
            d.date.format("%Y-%m-%d").to_string(),
            d.status.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DEFAULT_STATIONS;
    use std::io::Write;

    fn stations() -> Vec<StationId> {
        DEFAULT_STATIONS.iter().map(|s| StationId::from(*s)).collect()
    }

    fn zones() -> Vec<ZoneId> {
        crate::domain::DEFAULT_ZONES.iter().map(|z| ZoneId::from(*z)).collect()
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_station_row_with_full_profile() {
        let depths: Vec<String> =
            (0..13).map(|i| format!("{}:15.0:35.0:8.0", i * 2)).collect();
        let content = format!(
            "station,year_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis_cells,ammonium,phosphate,nitrate,nitrite\nV3,2016-W07,{},2.0,5.5,3.1,120,0.5,0.2,1.1,0.3\n",
            depths.join(";")
        );
        let f = write_tmp(&content);
        let recs = parse_station_csv(f.path(), &stations()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].profile.len(), 13);
        assert_eq!(recs[0].station_id.as_str(), "V3");
        assert_eq!(recs[0].iso_year_week, IsoYearWeek { year: 2016, week: 7 });
    }

    #[test]
    fn empty_cell_becomes_missing_marker() {
        let content = "station,year_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis_cells,ammonium,phosphate,nitrate,nitrite\nV1,2010-W03,0:14.0:34.5:7.5,1.0,,2.0,50,,0.1,,0.2\n";
        let f = write_tmp(content);
        let recs = parse_station_csv(f.path(), &stations()).unwrap();
        assert_eq!(recs[0].chl_band_5_10, None);
        assert_eq!(recs[0].ammonium, None);
        assert_eq!(recs[0].nitrate, None);
        assert_eq!(recs[0].nitrite, Some(0.2));
    }

    #[test]
    fn negative_depth_is_malformed() {
        let content = "station,year_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis_cells,ammonium,phosphate,nitrate,nitrite\nV1,2010-W03,-1:14.0:34.5:7.5,1.0,,2.0,50,,0.1,,0.2\n";
        let f = write_tmp(content);
        let err = parse_station_csv(f.path(), &stations()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 2, column: "profile", .. }));
    }

    #[test]
    fn unknown_station_rejected() {
        let content = "station,year_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis_cells,ammonium,phosphate,nitrate,nitrite\nV9,2010-W03,,,,,,,,,\n";
        let f = write_tmp(content);
        let err = parse_station_csv(f.path(), &stations()).unwrap_err();
        assert!(matches!(err, IngestError::UnknownStation { station, .. } if station == "V9"));
    }

    #[test]
    fn header_mismatch_rejected() {
        let f = write_tmp("a,b,c\n1,2,3\n");
        assert!(matches!(
            parse_station_csv(f.path(), &stations()),
            Err(IngestError::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn status_tokens_trimmed_and_case_insensitive() {
        let content = "zone,date,status\nVigoA,2016-02-05,CLOSED\nCangasF,2016-02-05, closed \nRedondelaC,2016-02-06,open\n";
        let f = write_tmp(content);
        let days = parse_zone_status_csv(f.path(), &zones()).unwrap();
        assert_eq!(days[0].status, ZoneStatus::Closed);
        assert_eq!(days[1].status, ZoneStatus::Closed);
        assert_eq!(days[2].status, ZoneStatus::Open);
        assert_eq!(days[0].zone_id.as_str(), "VigoA");
        assert_eq!(days[0].date, NaiveDate::from_ymd_opt(2016, 2, 5).unwrap());
    }

    #[test]
    fn bad_status_token_rejected() {
        let content = "zone,date,status\nVigoA,2016-02-05,HALF\n";
        let f = write_tmp(content);
        let err = parse_zone_status_csv(f.path(), &zones()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { column: "status", .. }));
    }

    #[test]
    fn meteo_and_upwelling_round_trip() {
        let meteo = vec![
            MeteoDay {
                date: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
                solar_irradiation: Some(12.25),
                sunshine_hours: None,
                insolation: Some(0.5),
            },
            MeteoDay {
                date: NaiveDate::from_ymd_opt(2016, 1, 2).unwrap(),
                solar_irradiation: None,
                sunshine_hours: Some(7.0),
                insolation: None,
            },
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_meteo_csv(f.path(), &meteo).unwrap();
        assert_eq!(parse_meteo_csv(f.path()).unwrap(), meteo);

        let up = vec![UpwellingDay {
            date: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
            values: [Some(120.0), None, Some(-35.5), Some(0.125)],
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_upwelling_csv(f.path(), &up).unwrap();
        assert_eq!(parse_upwelling_csv(f.path()).unwrap(), up);
    }
}
