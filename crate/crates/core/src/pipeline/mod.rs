//! End-to-end orchestration: synth/ingest through evaluation to the report
//! bundle, plus single-row prediction against a saved model.

mod config;
mod manifest;
mod predictor;
mod report;

pub use config::{parse_key_values, PipelineConfig, PruneMode};
pub use manifest::RunManifest;
pub use predictor::{predict_row, PredictError, Prediction};
pub use report::{run_pipeline, stats_report, PipelineError, StatsReport, ZoneOutcomes};

/// Derived cross-validation seed for one (zone, approach) pair, recorded in
/// every report row.
pub fn zone_approach_seed(base: u64, zone_index: usize, prune: bool) -> u64 {
    crate::synth::sub_seed_public(base, 1000 + 2 * zone_index as u64 + u64::from(prune))
}
