//! Design-matrix assembly, null-row filtering and on-disk persistence.

use super::features::{
    chlorophyll_weekly, column_mean_0_12, friday_status, monday_label, seasonality,
    stratification_differential, weekly_mean_meteo, weekly_mean_upwelling, MeteoField,
    ProfileField,
};
use super::PreprocessError;
use crate::domain::{IsoYearWeek, StationId, ZoneId, ZoneStatus};
use crate::ingest::{Dataset, StationWeekRecord};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

/// One weekly sample: feature cells (missing kept explicit) plus the
/// following-Monday label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub week: IsoYearWeek,
    pub values: Vec<Option<f64>>,
    pub label: ZoneStatus,
}

impl FeatureVector {
    pub fn is_null(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }
}

/// Samples-by-features table for one zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub zone_id: ZoneId,
    pub feature_names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl DesignMatrix {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Per-row completeness flags: true marks a row with missing cells.
    pub fn null_mask(&self) -> Vec<bool> {
        self.rows.iter().map(FeatureVector::is_null).collect()
    }

    /// Dense view; fails if any cell is missing.
    pub fn to_labeled(&self) -> Result<LabeledMatrix, PreprocessError> {
        let mut x = Vec::with_capacity(self.rows.len());
        let mut y = Vec::with_capacity(self.rows.len());
        let mut weeks = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let dense: Option<Vec<f64>> = row.values.iter().copied().collect();
            x.push(dense.ok_or(PreprocessError::IncompleteMatrix)?);
            y.push(row.label);
            weeks.push(row.week);
        }
        Ok(LabeledMatrix {
            zone_id: self.zone_id.clone(),
            feature_names: self.feature_names.clone(),
            x,
            y,
            weeks,
        })
    }
}

/// Fully dense matrix used by feature selection and the classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub zone_id: ZoneId,
    pub feature_names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<ZoneStatus>,
    pub weeks: Vec<IsoYearWeek>,
}

impl LabeledMatrix {
    pub fn n_rows(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Copy of the matrix restricted to the given feature columns (by index).
    pub fn select_columns(&self, cols: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            zone_id: self.zone_id.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            x: self.x.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect(),
            y: self.y.clone(),
            weeks: self.weeks.clone(),
        }
    }

    /// Copy of the matrix restricted to the given rows (by index).
    pub fn select_rows(&self, rows: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            zone_id: self.zone_id.clone(),
            feature_names: self.feature_names.clone(),
            x: rows.iter().map(|&r| self.x[r].clone()).collect(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            weeks: rows.iter().map(|&r| self.weeks[r]).collect(),
        }
    }
}

/// Assemble the design matrix for one zone.
///
/// All zones share 75 features; the 76th is this zone's Friday status.
/// Weeks without a following-Monday status cannot be labelled and are
/// skipped.
pub fn assemble_zone_matrix(
    dataset: &Dataset,
    zone: &ZoneId,
) -> Result<DesignMatrix, PreprocessError> {
    if dataset.station_weeks.is_empty() {
        return Err(PreprocessError::EmptyDataset);
    }

    let feature_names = feature_layout(&dataset.stations, zone);

    // First record wins on duplicates; validation reports them separately.
    let mut by_station_week: HashMap<(&StationId, IsoYearWeek), &StationWeekRecord> =
        HashMap::new();
    for rec in &dataset.station_weeks {
        by_station_week
            .entry((&rec.station_id, rec.iso_year_week))
            .or_insert(rec);
    }

    let first_week = dataset.station_weeks.iter().map(|r| r.iso_year_week).min().unwrap();
    let last_week = dataset.station_weeks.iter().map(|r| r.iso_year_week).max().unwrap();

    let mut rows = Vec::new();
    let mut week = first_week;
    loop {
        if let Ok(label) = monday_label(&dataset.status, zone, week) {
            let mut values: Vec<Option<f64>> =
                Vec::with_capacity(feature_names.len());

            let station_cells: Vec<Option<&StationWeekRecord>> = dataset
                .stations
                .iter()
                .map(|s| by_station_week.get(&(s, week)).copied())
                .collect();

            // Ten per-station blocks in the declared station order each.
            push_block(&mut values, &station_cells, |r| {
                column_mean_0_12(&r.profile, ProfileField::Temperature).ok()
            });
            push_block(&mut values, &station_cells, |r| {
                stratification_differential(&r.profile, ProfileField::Temperature).ok()
            });
            push_block(&mut values, &station_cells, |r| {
                column_mean_0_12(&r.profile, ProfileField::Salinity).ok()
            });
            push_block(&mut values, &station_cells, |r| {
                column_mean_0_12(&r.profile, ProfileField::Oxygen).ok()
            });
            push_block(&mut values, &station_cells, |r| chlorophyll_weekly(r).ok());
            push_block(&mut values, &station_cells, |r| r.dinophysis_cells);
            push_block(&mut values, &station_cells, |r| r.ammonium);
            push_block(&mut values, &station_cells, |r| r.phosphate);
            push_block(&mut values, &station_cells, |r| r.nitrate);
            push_block(&mut values, &station_cells, |r| r.nitrite);

            values.push(weekly_mean_meteo(&dataset.meteo, week, MeteoField::SolarIrradiation).ok());
            values.push(weekly_mean_meteo(&dataset.meteo, week, MeteoField::SunshineHours).ok());
            values.push(weekly_mean_meteo(&dataset.meteo, week, MeteoField::Insolation).ok());
            values.push(weekly_mean_upwelling(&dataset.upwelling, week).ok());
            values.push(Some(f64::from(seasonality(week))));
            values.push(friday_status(&dataset.status, zone, week).map(ZoneStatus::encode));

            debug_assert_eq!(values.len(), feature_names.len());
            rows.push(FeatureVector { week, values, label });
        }
        if week == last_week {
            break;
        }
        week = week.next();
    }

    Ok(DesignMatrix {
        zone_id: zone.clone(),
        feature_names,
        rows,
    })
}

fn push_block(
    values: &mut Vec<Option<f64>>,
    cells: &[Option<&StationWeekRecord>],
    extract: impl Fn(&StationWeekRecord) -> Option<f64>,
) {
    for cell in cells {
        values.push(cell.and_then(|r| extract(r)));
    }
}

/// Fixed 76-column layout: Table-1 variable families in order, per-station
/// names within each family.
fn feature_layout(stations: &[StationId], zone: &ZoneId) -> Vec<String> {
    let mut names = Vec::new();
    let families = [
        "temp_mean_0_12m",
        "temp_stratification",
        "salinity_mean_0_12m",
        "oxygen_mean_0_12m",
        "chl_max_band",
        "dinophysis_cells",
        "ammonium",
        "phosphate",
        "nitrate",
        "nitrite",
    ];
    for family in families {
        for station in stations {
            names.push(format!("{family}_{station}"));
        }
    }
    names.push("solar_irradiation_weekly".to_string());
    names.push("sunshine_hours_weekly".to_string());
    names.push("insolation_weekly".to_string());
    names.push("upwelling_weekly".to_string());
    names.push("week_of_year".to_string());
    names.push(format!("friday_status_{zone}"));
    names
}

/// Keep only complete rows, preserving order.
pub fn drop_null_rows(matrix: &DesignMatrix) -> DesignMatrix {
    DesignMatrix {
        zone_id: matrix.zone_id.clone(),
        feature_names: matrix.feature_names.clone(),
        rows: matrix.rows.iter().filter(|r| !r.is_null()).cloned().collect(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixManifest {
    zone: ZoneId,
    feature_names: Vec<String>,
    week_column: String,
    label_column: String,
    n_rows: usize,
    n_complete_rows: usize,
}

/// Persist as `<base>.csv` plus a `<base>.json` sidecar manifest.
pub fn save_design_matrix(base: &Path, matrix: &DesignMatrix) -> Result<(), PreprocessError> {
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");

    let mut w = csv::Writer::from_path(&csv_path)
        .map_err(|e| PreprocessError::Io(format!("{}: {e}", csv_path.display())))?;
    let mut header = vec!["week".to_string()];
    header.extend(matrix.feature_names.iter().cloned());
    header.push("label".to_string());
    w.write_record(&header)
        .map_err(|e| PreprocessError::Io(e.to_string()))?;
    for row in &matrix.rows {
        let mut rec = vec![row.week.to_string()];
        rec.extend(
            row.values
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
        );
        rec.push(row.label.to_string());
        w.write_record(&rec).map_err(|e| PreprocessError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| PreprocessError::Io(e.to_string()))?;

    let manifest = MatrixManifest {
        zone: matrix.zone_id.clone(),
        feature_names: matrix.feature_names.clone(),
        week_column: "week".to_string(),
        label_column: "label".to_string(),
        n_rows: matrix.n_rows(),
        n_complete_rows: matrix.rows.iter().filter(|r| !r.is_null()).count(),
    };
    let file = std::fs::File::create(&json_path)
        .map_err(|e| PreprocessError::Io(format!("{}: {e}", json_path.display())))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)
        .map_err(|e| PreprocessError::Io(e.to_string()))?;
    Ok(())
}

/// Load a matrix persisted by [`save_design_matrix`].
pub fn load_design_matrix(base: &Path) -> Result<DesignMatrix, PreprocessError> {
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");

    let file = std::fs::File::open(&json_path)
        .map_err(|e| PreprocessError::Io(format!("{}: {e}", json_path.display())))?;
    let manifest: MatrixManifest = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| PreprocessError::Io(e.to_string()))?;

    let mut reader = csv::Reader::from_path(&csv_path)
        .map_err(|e| PreprocessError::Io(format!("{}: {e}", csv_path.display())))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| PreprocessError::Io(e.to_string()))?;
        let week = IsoYearWeek::parse(&rec[0])
            .ok_or_else(|| PreprocessError::Io(format!("bad week token {:?}", &rec[0])))?;
        let n = rec.len();
        let mut values = Vec::with_capacity(n - 2);
        for cell in rec.iter().take(n - 1).skip(1) {
            if cell.is_empty() {
                values.push(None);
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| PreprocessError::Io(format!("bad cell {cell:?}")))?;
                values.push(Some(v));
            }
        }
        let label = match &rec[n - 1] {
            "OPEN" => ZoneStatus::Open,
            "CLOSED" => ZoneStatus::Closed,
            other => return Err(PreprocessError::Io(format!("bad label {other:?}"))),
        };
        rows.push(FeatureVector { week, values, label });
    }
    Ok(DesignMatrix {
        zone_id: manifest.zone,
        feature_names: manifest.feature_names,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn tiny_matrix() -> DesignMatrix {
        DesignMatrix {
            zone_id: ZoneId::from("VigoA"),
            feature_names: vec!["a".into(), "b".into()],
            rows: vec![
                FeatureVector {
                    week: IsoYearWeek { year: 2016, week: 1 },
                    values: vec![Some(1.0), Some(2.0)],
                    label: ZoneStatus::Open,
                },
                FeatureVector {
                    week: IsoYearWeek { year: 2016, week: 2 },
                    values: vec![Some(1.5), None],
                    label: ZoneStatus::Closed,
                },
                FeatureVector {
                    week: IsoYearWeek { year: 2016, week: 3 },
                    values: vec![Some(2.5), Some(0.5)],
                    label: ZoneStatus::Closed,
                },
            ],
        }
    }

    #[test]
    fn null_mask_and_drop() {
        let m = tiny_matrix();
        assert_eq!(m.null_mask(), vec![false, true, false]);
        let complete = drop_null_rows(&m);
        assert_eq!(complete.n_rows(), 2);
        assert_eq!(complete.n_rows() + 1, m.n_rows());
        assert!(complete.rows.iter().all(|r| !r.is_null()));
        // Order preserved.
        assert_eq!(complete.rows[0].week, IsoYearWeek { year: 2016, week: 1 });
        assert_eq!(complete.rows[1].week, IsoYearWeek { year: 2016, week: 3 });
    }

    #[test]
    fn drop_is_identity_on_complete_matrix() {
        let m = tiny_matrix();
        let complete = drop_null_rows(&m);
        assert_eq!(drop_null_rows(&complete), complete);
    }

    #[test]
    fn all_null_matrix_empties() {
        let mut m = tiny_matrix();
        for row in &mut m.rows {
            row.values[0] = None;
        }
        assert_eq!(drop_null_rows(&m).n_rows(), 0);
    }

    #[test]
    fn feature_layout_is_76_disjoint_names() {
        let stations: Vec<StationId> =
            crate::domain::DEFAULT_STATIONS.iter().map(|s| StationId::from(*s)).collect();
        let names = feature_layout(&stations, &ZoneId::from("CangasF"));
        assert_eq!(names.len(), 76);
        let unique: HashSet<&String> = names.iter().collect();
        assert_eq!(unique.len(), 76);
    }

    #[test]
    fn labeled_view_requires_completeness() {
        let m = tiny_matrix();
        assert!(m.to_labeled().is_err());
        let dense = drop_null_rows(&m).to_labeled().unwrap();
        assert_eq!(dense.n_rows(), 2);
        assert_eq!(dense.x[1], vec![2.5, 0.5]);
        assert_eq!(dense.y, vec![ZoneStatus::Open, ZoneStatus::Closed]);
    }

    #[test]
    fn matrix_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("vigo_a");
        let m = tiny_matrix();
        save_design_matrix(&base, &m).unwrap();
        let loaded = load_design_matrix(&base).unwrap();
        assert_eq!(loaded, m);
    }
}
