//! Flat key-value run configuration shared by the CLI subcommands.

use crate::synth::{GeneratorConfig, MissingRates};
use std::collections::BTreeMap;

/// Which pruning approaches the report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    Off,
    On,
    Both,
}

impl PruneMode {
    pub fn approaches(self) -> Vec<bool> {
        match self {
            PruneMode::Off => vec![false],
            PruneMode::On => vec![true],
            PruneMode::Both => vec![false, true],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub years: u32,
    pub grid: String,
    pub prune: PruneMode,
    pub stratified: bool,
    pub mlp_epochs: usize,
    pub label_noise: f64,
    pub bloom_intensity: f64,
    pub zones: Option<Vec<String>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            years: 15,
            grid: "desk".to_string(),
            prune: PruneMode::Both,
            stratified: false,
            mlp_epochs: 10,
            label_noise: 0.05,
            bloom_intensity: 1.0,
            zones: None,
        }
    }
}

impl PipelineConfig {
    /// Parse `key = value` lines; unknown keys are rejected so typos fail
    /// loudly.
    pub fn from_key_values(text: &str) -> Result<PipelineConfig, String> {
        let kv = parse_key_values(text)?;
        let mut cfg = PipelineConfig::default();
        for (key, value) in &kv {
            match key.as_str() {
                "seed" => cfg.seed = parse(key, value)?,
                "years" => cfg.years = parse(key, value)?,
                "grid" => {
                    if value != "desk" && value != "full" {
                        return Err(format!("grid must be desk or full, got {value:?}"));
                    }
                    cfg.grid = value.clone();
                }
                "prune" => {
                    cfg.prune = match value.as_str() {
                        "off" => PruneMode::Off,
                        "on" => PruneMode::On,
                        "both" => PruneMode::Both,
                        other => return Err(format!("prune must be off/on/both, got {other:?}")),
                    }
                }
                "stratified" => cfg.stratified = parse(key, value)?,
                "mlp_epochs" => cfg.mlp_epochs = parse(key, value)?,
                "label_noise" => cfg.label_noise = parse(key, value)?,
                "bloom_intensity" => cfg.bloom_intensity = parse(key, value)?,
                "zones" => {
                    cfg.zones =
                        Some(value.split(',').map(|z| z.trim().to_string()).collect())
                }
                other => return Err(format!("unknown config key {other:?}")),
            }
        }
        Ok(cfg)
    }

    /// Generator settings implied by this run configuration.
    pub fn generator_config(&self) -> GeneratorConfig {
        let mut gen = GeneratorConfig::paper_scale(self.seed);
        gen.n_years = self.years;
        gen.label_noise = self.label_noise;
        gen.bloom_intensity = self.bloom_intensity;
        if self.years == 0 {
            gen.n_years = 1;
        }
        gen.missing = MissingRates::default();
        gen
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value {value:?} for key {key:?}"))
}

/// Split a flat `key = value` file: one pair per line, `#` comments and
/// blank lines ignored.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value, got {raw:?}", ln + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
