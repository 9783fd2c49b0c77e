//! Seeded synthetic-estuary generator.
//!
//! Produces schema-compatible raw files for the four ingest sources with a
//! planted, learnable closure process: a seasonal autoregressive bloom
//! driver conditions the station observables (Dinophysis counts above all),
//! and each zone closes on Mondays when a thresholded function of lagged
//! bloom state and its own previous published status crosses a calibrated
//! threshold. Published labels carry one-sided noise (a closure is missed
//! with the configured probability), so the generator's own rule bounds
//! what any model can score.
//!
//! Everything is drawn from substreams of one seed: identical configs give
//! byte-identical output files.

mod bayes;
mod process;

pub use bayes::{bayes_reference, bounds_from, BayesReference, ZoneBound};
pub use process::{generate, GeneratedData, LatentTrace};

use crate::domain::{StationId, ZoneId, DEFAULT_STATIONS, DEFAULT_ZONES};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-source missing-data injection rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingRates {
    /// Whole station-week record absent (vessel skipped the station).
    pub station_record: f64,
    /// Individual station cell empty given the record exists.
    pub station_cell: f64,
    /// Individual meteo cell empty.
    pub meteo_cell: f64,
    /// Individual upwelling reading empty.
    pub upwelling_cell: f64,
}

impl MissingRates {
    pub fn zero() -> MissingRates {
        MissingRates {
            station_record: 0.0,
            station_cell: 0.0,
            meteo_cell: 0.0,
            upwelling_cell: 0.0,
        }
    }
}

impl Default for MissingRates {
    /// Tuned so a 15-year run keeps roughly 175 of 783 rows complete:
    /// ((1-0.10)(1-0.0215)^5)^7 = 0.2235.
    fn default() -> Self {
        MissingRates {
            station_record: 0.10,
            station_cell: 0.0215,
            meteo_cell: 0.02,
            upwelling_cell: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_years: u32,
    pub start_year: i32,
    pub stations: Vec<StationId>,
    pub zones: Vec<ZoneId>,
    pub missing: MissingRates,
    /// Scales the seasonal bloom driver.
    pub bloom_intensity: f64,
    /// Probability that a rule-mandated closure is missed in the published
    /// history (one-sided label noise).
    pub label_noise: f64,
    /// Target published closure fraction per zone.
    pub zone_closure_rates: BTreeMap<ZoneId, f64>,
}

impl GeneratorConfig {
    /// Paper-scale defaults: 2004-2018 (783 ISO weeks), seven stations,
    /// twelve zones with the observed outer-to-inner closure gradient.
    pub fn paper_scale(seed: u64) -> GeneratorConfig {
        GeneratorConfig { seed, ..GeneratorConfig::base(15) }
    }

    /// Small config for fast tests.
    pub fn desk_scale(seed: u64, n_years: u32) -> GeneratorConfig {
        GeneratorConfig { seed, ..GeneratorConfig::base(n_years) }
    }

    fn base(n_years: u32) -> GeneratorConfig {
        let rates: [(&str, f64); 12] = [
            ("CangasF", 0.48),
            ("CangasG", 0.46),
            ("CangasH", 0.41),
            ("CangasC", 0.29),
            ("CangasD", 0.29),
            ("CangasE", 0.16),
            ("VigoA", 0.24),
            ("RedondelaA", 0.10),
            ("RedondelaB", 0.05),
            ("RedondelaC", 0.04),
            ("RedondelaD", 0.06),
            ("RedondelaE", 0.10),
        ];
        GeneratorConfig {
            seed: 0,
            n_years,
            start_year: 2004,
            stations: DEFAULT_STATIONS.iter().map(|s| StationId::from(*s)).collect(),
            zones: DEFAULT_ZONES.iter().map(|z| ZoneId::from(*z)).collect(),
            missing: MissingRates::default(),
            bloom_intensity: 1.0,
            label_noise: 0.05,
            zone_closure_rates: rates
                .iter()
                .map(|(z, r)| (ZoneId::from(*z), *r))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_years == 0 {
            return Err("n_years must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err("label_noise must be in [0,1]".into());
        }
        for (zone, rate) in &self.zone_closure_rates {
            if !(0.0..=1.0).contains(rate) {
                return Err(format!("closure rate for {zone} must be in [0,1]"));
            }
        }
        for rate in [
            self.missing.station_record,
            self.missing.station_cell,
            self.missing.meteo_cell,
            self.missing.upwelling_cell,
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err("missing rates must be in [0,1]".into());
            }
        }
        for zone in &self.zones {
            if !self.zone_closure_rates.contains_key(zone) {
                return Err(format!("no closure rate configured for {zone}"));
            }
        }
        Ok(())
    }
}

/// Substream seed derivation (splitmix-style), keeping every stochastic
/// component on its own reproducible stream.
pub(crate) fn sub_seed(seed: u64, tag: u64) -> u64 {
    sub_seed_public(seed, tag)
}

/// Seed mixing shared with the pipeline's per-zone seed derivation.
pub fn sub_seed_public(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl GeneratorConfig {
    /// Apply flat `key = value` overrides (the synth config file format).
    pub fn apply_key_values(
        &mut self,
        kv: &BTreeMap<String, String>,
    ) -> Result<(), String> {
        let parse_f64 = |key: &str, v: &str| -> Result<f64, String> {
            v.parse().map_err(|_| format!("bad value {v:?} for key {key:?}"))
        };
        for (key, value) in kv {
            match key.as_str() {
                "seed" => {
                    self.seed =
                        value.parse().map_err(|_| format!("bad value {value:?} for seed"))?
                }
                "years" => {
                    self.n_years =
                        value.parse().map_err(|_| format!("bad value {value:?} for years"))?
                }
                "start_year" => {
                    self.start_year = value
                        .parse()
                        .map_err(|_| format!("bad value {value:?} for start_year"))?
                }
                "label_noise" => self.label_noise = parse_f64(key, value)?,
                "bloom_intensity" => self.bloom_intensity = parse_f64(key, value)?,
                "missing_station_record" => {
                    self.missing.station_record = parse_f64(key, value)?
                }
                "missing_station_cell" => self.missing.station_cell = parse_f64(key, value)?,
                "missing_meteo" => self.missing.meteo_cell = parse_f64(key, value)?,
                "missing_upwelling" => self.missing.upwelling_cell = parse_f64(key, value)?,
                other => {
                    if let Some(zone) = other.strip_prefix("closure_rate_") {
                        let rate = parse_f64(key, value)?;
                        self.zone_closure_rates.insert(ZoneId::from(zone), rate);
                    } else {
                        return Err(format!("unknown generator key {other:?}"));
                    }
                }
            }
        }
        self.validate()
    }
}
