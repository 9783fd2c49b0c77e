//! The generating process itself: latent drivers, station observables,
//! closure chains and missing-data injection.

use super::{sub_seed, GeneratorConfig};
use crate::domain::{IsoYearWeek, ZoneId, ZoneStatus};
use crate::ingest::{
    write_meteo_csv, write_station_csv, write_upwelling_csv, write_zone_status_csv, Dataset,
    DepthSample, MeteoDay, StationWeekRecord, UpwellingDay, ZoneStatusDay,
};
use chrono::{Datelike, Days};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use std::path::Path;

const PROFILE_DEPTHS: [f64; 13] =
    [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0];

/// Multiplicative hysteresis: an already-closed zone stays closed until the
/// bloom driver falls below threshold/(1 + HYSTERESIS_GAIN), giving closure
/// runs without an absorbing state.
const HYSTERESIS_GAIN: f64 = 0.8;

/// Latent state kept alongside the dataset so the acceptance oracle can
/// compare the rule against the published labels.
#[derive(Debug, Clone)]
pub struct LatentTrace {
    pub weeks: Vec<IsoYearWeek>,
    /// Bloom driver per feature week.
    pub bloom: Vec<f64>,
    /// Rule-mandated Monday state for weeks[0].next() .. last.next(),
    /// i.e. entry w is the rule decision labelling feature week w.
    pub rule_closed: BTreeMap<ZoneId, Vec<bool>>,
    /// Same shape, after the one-sided miss noise: the published labels.
    pub published_closed: BTreeMap<ZoneId, Vec<bool>>,
    /// Calibrated closure threshold per zone.
    pub thresholds: BTreeMap<ZoneId, f64>,
}

#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub dataset: Dataset,
    pub latent: LatentTrace,
}

impl GeneratedData {
    /// Write the four raw source files into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<(), crate::ingest::IngestError> {
        write_station_csv(&dir.join("stations.csv"), &self.dataset.station_weeks)?;
        write_meteo_csv(&dir.join("meteo.csv"), &self.dataset.meteo)?;
        write_upwelling_csv(&dir.join("upwelling.csv"), &self.dataset.upwelling)?;
        write_zone_status_csv(&dir.join("status.csv"), &self.dataset.status)?;
        Ok(())
    }
}

/// Seasonal bloom propensity: a late-summer/autumn bump peaking around
/// week 37, near zero in winter.
fn season_bump(week: u32) -> f64 {
    let d = (week as f64 - 37.0) / 8.0;
    (-d * d).exp()
}

/// Winter freshwater bump for salinity/nutrient seasonality, peaking near
/// week 2 and wrapping across the year boundary.
fn winter_bump(week: u32) -> f64 {
    let d = (week as f64 - 2.0).rem_euclid(52.18);
    let dist = d.min(52.18 - d) / 9.0;
    (-dist * dist).exp()
}

pub fn generate(config: &GeneratorConfig) -> Result<GeneratedData, String> {
    config.validate()?;

    // All ISO weeks of the configured years.
    let mut weeks = Vec::new();
    for year in config.start_year..config.start_year + config.n_years as i32 {
        let mut w = 1u32;
        while let Some(yw) = IsoYearWeek::new(year, w) {
            weeks.push(yw);
            w += 1;
        }
    }
    let n_weeks = weeks.len();

    // Latent drivers: weekly upwelling mean and the bloom AR(1).
    let mut rng_latent = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 1));
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut upwelling_weekly = Vec::with_capacity(n_weeks);
    let mut bloom = Vec::with_capacity(n_weeks);
    let mut u_prev: f64 = 0.0;
    let mut b_prev: f64 = 0.0;
    for yw in &weeks {
        // Upwelling favourable in summer, downwelling in winter (index in
        // m^3/s/km around +-1500).
        let u_target = 900.0 * season_bump(yw.week) - 350.0 * winter_bump(yw.week);
        let u = 0.6 * u_prev + 0.4 * u_target + 280.0 * noise.sample(&mut rng_latent);
        upwelling_weekly.push(u);

        let u_feed = (u_prev / 1000.0).max(0.0);
        let b_target = config.bloom_intensity * (3.0 * season_bump(yw.week) + 0.7 * u_feed);
        let b = (0.72 * b_prev + 0.28 * b_target + 0.30 * noise.sample(&mut rng_latent)).max(0.0);
        bloom.push(b);
        u_prev = u;
        b_prev = b;
    }

    // Closure chains per zone, threshold calibrated to the target rate.
    let mut rule_closed = BTreeMap::new();
    let mut published_closed = BTreeMap::new();
    let mut thresholds = BTreeMap::new();
    for (zi, zone) in config.zones.iter().enumerate() {
        let mut rng_flip = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 100 + zi as u64));
        // One miss draw per decided Monday, fixed across calibration.
        let flip_u: Vec<f64> = (0..n_weeks).map(|_| rng_flip.gen::<f64>()).collect();
        let target = config.zone_closure_rates[zone];

        let simulate = |theta: f64| -> (Vec<bool>, Vec<bool>, f64) {
            let mut rule = Vec::with_capacity(n_weeks);
            let mut published = Vec::with_capacity(n_weeks);
            let mut prev_pub = false; // all zones start open
            for (w, &b) in bloom.iter().enumerate() {
                let score = b * (1.0 + HYSTERESIS_GAIN * f64::from(prev_pub)) - theta;
                let rule_c = score > 0.0;
                let pub_c = rule_c && flip_u[w] >= config.label_noise;
                rule.push(rule_c);
                published.push(pub_c);
                prev_pub = pub_c;
            }
            let rate = published.iter().filter(|&&c| c).count() as f64 / n_weeks as f64;
            (rule, published, rate)
        };

        // The published rate is non-increasing in theta; bisect.
        let mut lo = 0.01;
        let mut hi = config.bloom_intensity * 6.0 + 1.0;
        for _ in 0..50 {
            let mid = (lo + hi) / 2.0;
            let (_, _, rate) = simulate(mid);
            if rate > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = (lo + hi) / 2.0;
        let (rule, published, _) = simulate(theta);
        rule_closed.insert(zone.clone(), rule);
        published_closed.insert(zone.clone(), published);
        thresholds.insert(zone.clone(), theta);
    }

    // Station observables conditioned on the bloom driver.
    let mut rng_obs = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 2));
    let mut station_weeks = Vec::new();
    for (w_idx, yw) in weeks.iter().enumerate() {
        let b = bloom[w_idx];
        let week_no = yw.week;
        for (si, station) in config.stations.iter().enumerate() {
            let station_offset = 0.12 * si as f64;
            let t_surface = 13.2 + 3.8 * season_offset_sin(week_no) + 0.3 * noise.sample(&mut rng_obs);
            let strat = 0.6 + 1.9 * season_bump(week_no) + 0.25 * b;
            let halocline = 0.9 * winter_bump(week_no);
            let profile: Vec<DepthSample> = PROFILE_DEPTHS
                .iter()
                .map(|&depth| {
                    let warm = (1.0 - depth / 24.0).max(0.0);
                    DepthSample {
                        depth_m: depth,
                        temperature_c: Some(
                            t_surface - strat * (depth / 12.0).min(1.0) * 2.0
                                + 0.15 * warm
                                + 0.12 * noise.sample(&mut rng_obs),
                        ),
                        salinity_psu: Some(
                            35.4 - halocline * (-depth / 4.0).exp()
                                + 0.08 * noise.sample(&mut rng_obs),
                        ),
                        oxygen_mgl: Some(
                            8.4 - 0.06 * (t_surface - 13.0) - 0.03 * depth / 2.0
                                + 0.18 * noise.sample(&mut rng_obs),
                        ),
                    }
                })
                .collect();

            let chl_base = (0.25 + 0.70 * b + 0.22 * noise.sample(&mut rng_obs)).exp();
            let dino = ((2.9 + 1.45 * b + station_offset + 0.20 * noise.sample(&mut rng_obs))
                .exp())
            .round();
            let u_norm = upwelling_weekly[w_idx] / 1000.0;
            let nutrients = |base: f64, scale: f64, rng: &mut ChaCha8Rng| {
                (base + scale * u_norm.max(0.0) + 0.35 * winter_bump(week_no)
                    + 0.12 * noise.sample(rng))
                .max(0.0)
            };
            station_weeks.push(StationWeekRecord {
                station_id: station.clone(),
                iso_year_week: *yw,
                profile,
                chl_band_0_5: Some(chl_base * (1.0 + 0.10 * noise.sample(&mut rng_obs))),
                chl_band_5_10: Some(chl_base * (0.85 + 0.10 * noise.sample(&mut rng_obs))),
                chl_band_10_15: Some(chl_base * (0.65 + 0.10 * noise.sample(&mut rng_obs))),
                dinophysis_cells: Some(dino.max(0.0)),
                ammonium: Some(nutrients(0.8, 0.5, &mut rng_obs)),
                phosphate: Some(nutrients(0.4, 0.4, &mut rng_obs)),
                nitrate: Some(nutrients(2.2, 1.8, &mut rng_obs)),
                nitrite: Some(nutrients(0.3, 0.3, &mut rng_obs)),
            });
        }
    }

    // Daily meteorology and upwelling readings.
    let week_index: BTreeMap<IsoYearWeek, usize> =
        weeks.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let mut rng_meteo = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 3));
    let first_day = weeks[0].monday().expect("valid week");
    let last_day = weeks[n_weeks - 1]
        .next()
        .monday()
        .expect("valid week"); // include the final labelling Monday
    let mut meteo = Vec::new();
    let mut upwelling = Vec::new();
    let mut day = first_day;
    while day <= last_day {
        let yw = IsoYearWeek::from_date(day);
        let w_idx = week_index.get(&yw).copied();
        let doy = day.ordinal() as f64;
        let daylength = 12.0 + 4.3 * ((doy - 172.0) / 365.25 * std::f64::consts::TAU).cos();
        let cloud = (0.45 + 0.35 * winter_bump(yw.week) + 0.20 * rng_meteo.gen::<f64>())
            .clamp(0.05, 0.95);
        let irradiation = (28.0 * daylength / 16.0 * (1.0 - 0.75 * cloud)).max(0.5);
        meteo.push(MeteoDay {
            date: day,
            solar_irradiation: Some(irradiation),
            sunshine_hours: Some((daylength * (1.0 - cloud)).max(0.0)),
            insolation: Some((1.0 - cloud).clamp(0.0, 1.0)),
        });

        let u_week = w_idx.map_or(0.0, |i| upwelling_weekly[i]);
        let readings: Vec<f64> = (0..4)
            .map(|_| u_week + 180.0 * noise.sample(&mut rng_meteo))
            .collect();
        upwelling.push(UpwellingDay {
            date: day,
            values: [
                Some(readings[0]),
                Some(readings[1]),
                Some(readings[2]),
                Some(readings[3]),
            ],
        });
        day = day.checked_add_days(Days::new(1)).expect("date in range");
    }

    // Daily status per zone: the Monday-decided state holds all week.
    // Week index n_weeks (the final Monday) takes the last decided state.
    let mut status = Vec::new();
    for zone in &config.zones {
        let published = &published_closed[zone];
        let mut day = first_day;
        while day <= last_day {
            let yw = IsoYearWeek::from_date(day);
            // Status of week w is the decision labelled by feature week w-1,
            // i.e. published[w_idx - 1]; the very first week starts open.
            let closed = week_index.get(&yw).copied().map_or_else(
                || *published.last().expect("non-empty"), // the final Monday
                |i| if i == 0 { false } else { published[i - 1] },
            );
            status.push(ZoneStatusDay {
                zone_id: zone.clone(),
                date: day,
                status: if closed { ZoneStatus::Closed } else { ZoneStatus::Open },
            });
            day = day.checked_add_days(Days::new(1)).expect("date in range");
        }
    }

    // Missing-data injection.
    let mut rng_miss = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 4));
    let m = &config.missing;
    let mut kept_station_weeks = Vec::with_capacity(station_weeks.len());
    for mut rec in station_weeks {
        if rng_miss.gen::<f64>() < m.station_record {
            continue;
        }
        let blank = |v: &mut Option<f64>, rng: &mut ChaCha8Rng| {
            if rng.gen::<f64>() < m.station_cell {
                *v = None;
            }
        };
        for sample in &mut rec.profile {
            blank(&mut sample.temperature_c, &mut rng_miss);
            blank(&mut sample.salinity_psu, &mut rng_miss);
            blank(&mut sample.oxygen_mgl, &mut rng_miss);
        }
        blank(&mut rec.chl_band_0_5, &mut rng_miss);
        blank(&mut rec.chl_band_5_10, &mut rng_miss);
        blank(&mut rec.chl_band_10_15, &mut rng_miss);
        blank(&mut rec.dinophysis_cells, &mut rng_miss);
        blank(&mut rec.ammonium, &mut rng_miss);
        blank(&mut rec.phosphate, &mut rng_miss);
        blank(&mut rec.nitrate, &mut rng_miss);
        blank(&mut rec.nitrite, &mut rng_miss);
        kept_station_weeks.push(rec);
    }
    for day in &mut meteo {
        let blank = |v: &mut Option<f64>, rng: &mut ChaCha8Rng| {
            if rng.gen::<f64>() < m.meteo_cell {
                *v = None;
            }
        };
        blank(&mut day.solar_irradiation, &mut rng_miss);
        blank(&mut day.sunshine_hours, &mut rng_miss);
        blank(&mut day.insolation, &mut rng_miss);
    }
    for day in &mut upwelling {
        for v in &mut day.values {
            if rng_miss.gen::<f64>() < m.upwelling_cell {
                *v = None;
            }
        }
    }

    Ok(GeneratedData {
        dataset: Dataset {
            stations: config.stations.clone(),
            zones: config.zones.clone(),
            station_weeks: kept_station_weeks,
            meteo,
            upwelling,
            status,
        },
        latent: LatentTrace {
            weeks,
            bloom,
            rule_closed,
            published_closed,
            thresholds,
        },
    })
}

fn season_offset_sin(week: u32) -> f64 {
    ((week as f64 - 11.0) / 52.18 * std::f64::consts::TAU).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{assemble_zone_matrix, drop_null_rows};

    #[test]
    fn paper_scale_has_783_weeks() {
        // 2004-2018 contains twelve 52-week and three 53-week ISO years.
        let config = GeneratorConfig::paper_scale(42);
        let mut count = 0;
        for year in 2004..=2018 {
            let mut w = 1;
            while IsoYearWeek::new(year, w).is_some() {
                count += 1;
                w += 1;
            }
        }
        assert_eq!(count, 783);
        let _ = config;
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let config = GeneratorConfig::desk_scale(7, 2);
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        generate(&config).unwrap().write_files(d1.path()).unwrap();
        generate(&config).unwrap().write_files(d2.path()).unwrap();
        for name in ["stations.csv", "meteo.csv", "upwelling.csv", "status.csv"] {
            let a = std::fs::read(d1.path().join(name)).unwrap();
            let b = std::fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
            assert!(!a.is_empty());
        }
    }

    #[test]
    fn zero_missingness_gives_zero_null_rows() {
        let mut config = GeneratorConfig::desk_scale(3, 2);
        config.missing = super::super::MissingRates::zero();
        let data = generate(&config).unwrap();
        for zone in &config.zones {
            let matrix = assemble_zone_matrix(&data.dataset, zone).unwrap();
            let complete = drop_null_rows(&matrix);
            assert_eq!(matrix.n_rows(), complete.n_rows(), "{zone}");
            assert!(matrix.n_rows() > 0);
        }
    }

    #[test]
    fn labels_match_latent_published_chain() {
        let mut config = GeneratorConfig::desk_scale(11, 2);
        config.missing = super::super::MissingRates::zero();
        let data = generate(&config).unwrap();
        let zone = &config.zones[0];
        let matrix = assemble_zone_matrix(&data.dataset, zone).unwrap();
        assert_eq!(matrix.n_features(), 76);
        let published = &data.latent.published_closed[zone];
        assert_eq!(matrix.n_rows(), data.latent.weeks.len());
        for (i, row) in matrix.rows.iter().enumerate() {
            assert_eq!(row.label.is_closed(), published[i], "week {}", row.week);
        }
    }

    #[test]
    fn friday_feature_equals_previous_monday_state() {
        let mut config = GeneratorConfig::desk_scale(19, 2);
        config.missing = super::super::MissingRates::zero();
        let data = generate(&config).unwrap();
        let zone = &config.zones[2];
        let matrix = assemble_zone_matrix(&data.dataset, zone).unwrap();
        let friday_col = matrix.feature_names.len() - 1;
        let published = &data.latent.published_closed[zone];
        for (i, row) in matrix.rows.iter().enumerate() {
            let expect = if i == 0 { 0.0 } else { f64::from(published[i - 1]) };
            assert_eq!(row.values[friday_col], Some(expect), "week {}", row.week);
        }
    }

    #[test]
    fn closure_rates_match_targets_within_three_points() {
        let config = GeneratorConfig::paper_scale(5);
        let data = generate(&config).unwrap();
        for zone in &config.zones {
            let published = &data.latent.published_closed[zone];
            let rate = published.iter().filter(|&&c| c).count() as f64 / published.len() as f64;
            let target = config.zone_closure_rates[zone];
            assert!(
                (rate - target).abs() <= 0.03,
                "{zone}: rate {rate:.3} vs target {target:.3}"
            );
        }
    }

    #[test]
    fn outer_zones_close_more_than_inner_zones() {
        let config = GeneratorConfig::paper_scale(8);
        let data = generate(&config).unwrap();
        let rate = |name: &str| {
            let p = &data.latent.published_closed[&ZoneId::from(name)];
            p.iter().filter(|&&c| c).count() as f64 / p.len() as f64
        };
        for outer in ["CangasF", "CangasG", "CangasH"] {
            for inner in ["RedondelaB", "RedondelaC", "RedondelaD"] {
                assert!(rate(outer) > rate(inner), "{outer} vs {inner}");
            }
        }
    }

    #[test]
    fn zone_matrices_differ_only_in_friday_column_and_labels() {
        let mut config = GeneratorConfig::desk_scale(23, 2);
        config.missing = super::super::MissingRates::zero();
        let data = generate(&config).unwrap();
        let a = assemble_zone_matrix(&data.dataset, &config.zones[0]).unwrap();
        let b = assemble_zone_matrix(&data.dataset, &config.zones[5]).unwrap();
        let last = a.n_features() - 1;
        assert_eq!(a.feature_names[..last], b.feature_names[..last]);
        assert_ne!(a.feature_names[last], b.feature_names[last]);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.week, rb.week);
            assert_eq!(ra.values[..last], rb.values[..last]);
        }
    }

    #[test]
    fn paper_scale_complete_rows_near_175() {
        let config = GeneratorConfig::paper_scale(42);
        let data = generate(&config).unwrap();
        let zone = &config.zones[0];
        let matrix = assemble_zone_matrix(&data.dataset, zone).unwrap();
        assert_eq!(matrix.n_rows(), 783);
        let complete = drop_null_rows(&matrix).n_rows();
        assert!(
            (165..=185).contains(&complete),
            "complete rows {complete} not within 175 +- 10"
        );
    }
}
