//! Report-bundle production: per-zone grids for both approaches, the
//! best-model tables, feature persistence, significance comparisons and the
//! manifest.

use super::config::PipelineConfig;
use super::manifest::{file_digest, RunManifest};
use super::zone_approach_seed;
use crate::domain::ZoneId;
use crate::eval::grid::FeaturePersistence;
use crate::eval::{grid_search, CvConfig, EvalOutcome, GridConfig};
use crate::models::ModelFamily;
use crate::preprocess::{assemble_zone_matrix, drop_null_rows, save_design_matrix};
use crate::stats::{anderson_darling, one_way_anova, shapiro_wilk, tukey_kramer};
use crate::stats::{PairwiseResult, SampleGroup, TestResult};
use crate::synth::{bounds_from, generate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("cannot access {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("zone {zone}: {message}")]
    Zone { zone: ZoneId, message: String },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Everything the `evaluate` step knows about one (zone, approach) run;
/// persisted as JSON next to the tables.
#[derive(Debug, Serialize, Deserialize)]
pub struct ZoneOutcomes {
    pub zone: ZoneId,
    /// 1 = pruning off, 2 = pruning on, None when the grid mixed both.
    pub approach: Option<u8>,
    pub cv_seed: u64,
    pub manifest_id: String,
    pub outcomes: Vec<EvalOutcome>,
    pub n_failed_cells: usize,
}

/// Normality + ANOVA + Tukey-Kramer over the per-fold metric values of the
/// best configuration of each family.
#[derive(Debug, Serialize, Deserialize)]
pub struct StatsReport {
    pub metric: String,
    pub alpha: f64,
    pub groups: Vec<GroupSummary>,
    pub shapiro_wilk: BTreeMap<String, TestResult>,
    pub anderson_darling: BTreeMap<String, TestResult>,
    pub anova: Option<TestResult>,
    pub tukey: Vec<PairwiseResult>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroupSummary {
    pub family: String,
    pub params: String,
    pub values: Vec<f64>,
}

/// Build the per-family comparison for one ranked outcome list.
pub fn stats_report(outcomes: &[EvalOutcome], metric: &str, alpha: f64) -> StatsReport {
    let mut groups: Vec<GroupSummary> = Vec::new();
    for family in [
        ModelFamily::Knn,
        ModelFamily::NaiveBayes,
        ModelFamily::RandomForest,
        ModelFamily::Mlp,
    ] {
        // Outcomes arrive ranked best-first, so the first hit per family is
        // its champion.
        if let Some(best) = outcomes.iter().find(|o| o.spec.family() == family) {
            let values: Vec<f64> = best
                .folds
                .iter()
                .filter_map(|f| match metric {
                    "sensitivity" => f.sensitivity,
                    "accuracy" => Some(f.accuracy),
                    "kappa" => Some(f.kappa),
                    _ => None,
                })
                .collect();
            if !values.is_empty() {
                groups.push(GroupSummary {
                    family: family.to_string(),
                    params: best.spec.params.label(),
                    values,
                });
            }
        }
    }

    let mut sw = BTreeMap::new();
    let mut ad = BTreeMap::new();
    let mut samples = Vec::new();
    for g in &groups {
        let sample = SampleGroup::new(g.family.clone(), g.values.clone());
        if let Ok(r) = shapiro_wilk(&sample) {
            sw.insert(g.family.clone(), r);
        }
        if let Ok(r) = anderson_darling(&sample) {
            ad.insert(g.family.clone(), r);
        }
        samples.push(sample);
    }
    let eligible: Vec<SampleGroup> =
        samples.iter().filter(|g| g.len() >= 2).cloned().collect();
    let anova = if eligible.len() >= 2 { one_way_anova(&eligible).ok() } else { None };
    let tukey = if eligible.len() >= 2 {
        tukey_kramer(&eligible, alpha).unwrap_or_default()
    } else {
        Vec::new()
    };

    StatsReport {
        metric: metric.to_string(),
        alpha,
        groups,
        shapiro_wilk: sw,
        anderson_darling: ad,
        anova,
        tukey,
    }
}

struct ZoneRun {
    zone: ZoneId,
    approach: u8,
    cv_seed: u64,
    feature_names: Vec<String>,
    best: Option<EvalOutcome>,
    outcomes: Vec<EvalOutcome>,
    n_failed: usize,
    persistence: FeaturePersistence,
    stats: StatsReport,
}

/// Run the whole pipeline on a (typically synthetic) run configuration and
/// write the report bundle under `out_dir`.
///
/// Bundle layout:
///   manifest.json, data/*.csv, matrices/<zone>.{csv,json},
///   outcomes/<zone>_approachN.json, stats/<zone>_approachN.json,
///   best_approach1.csv, best_approach2.csv, persistence.csv,
///   bayes_reference.json
pub fn run_pipeline(cfg: &PipelineConfig, config_text: &str, out_dir: &Path) -> Result<RunManifest, PipelineError> {
    let gen_config = cfg.generator_config();
    let data = generate(&gen_config).map_err(PipelineError::Config)?;
    let reference = bounds_from(&gen_config, &data);

    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let data_dir = out_dir.join("data");
    std::fs::create_dir_all(&data_dir).map_err(io_err(&data_dir))?;
    data.write_files(&data_dir)
        .map_err(|e| PipelineError::Io { path: data_dir.clone(), message: e.to_string() })?;

    let zones: Vec<ZoneId> = match &cfg.zones {
        Some(names) => names.iter().map(|n| ZoneId::from(n.as_str())).collect(),
        None => gen_config.zones.clone(),
    };
    let grid_base = match cfg.grid.as_str() {
        "full" => GridConfig::full(),
        _ => GridConfig::desk(),
    };
    let grid_base = GridConfig { mlp_epochs: cfg.mlp_epochs, ..grid_base };
    let cv_cfg = CvConfig { k: 10, stratified: cfg.stratified };
    let approaches = cfg.prune.approaches();

    // Input digests and per-report seeds go into the manifest first so
    // every report row can reference its id.
    let mut inputs = BTreeMap::new();
    for name in ["stations.csv", "meteo.csv", "upwelling.csv", "status.csv"] {
        let digest = file_digest(&data_dir.join(name))
            .map_err(|e| PipelineError::Io { path: data_dir.join(name), message: e })?;
        inputs.insert(name.to_string(), digest);
    }
    let mut cv_seeds = BTreeMap::new();
    for (zi, zone) in zones.iter().enumerate() {
        for &prune in &approaches {
            let approach = approach_number(prune);
            cv_seeds.insert(
                format!("{zone}/approach{approach}"),
                zone_approach_seed(cfg.seed, zi, prune),
            );
        }
    }
    let manifest = RunManifest::new(cfg.seed, cv_seeds, config_text, inputs);

    let matrices_dir = out_dir.join("matrices");
    let outcomes_dir = out_dir.join("outcomes");
    let stats_dir = out_dir.join("stats");
    for dir in [&matrices_dir, &outcomes_dir, &stats_dir] {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }

    // Zones are independent; run them in parallel and emit in declared order.
    let runs: Vec<Result<Vec<ZoneRun>, PipelineError>> = zones
        .par_iter()
        .enumerate()
        .map(|(zi, zone)| {
            let matrix = assemble_zone_matrix(&data.dataset, zone)
                .map_err(|e| PipelineError::Zone { zone: zone.clone(), message: e.to_string() })?;
            save_design_matrix(&matrices_dir.join(zone.as_str()), &matrix)
                .map_err(|e| PipelineError::Zone { zone: zone.clone(), message: e.to_string() })?;
            let complete = drop_null_rows(&matrix);
            if complete.n_rows() == 0 {
                log::warn!("{zone}: no complete rows after null filtering");
            }
            let dense = complete
                .to_labeled()
                .map_err(|e| PipelineError::Zone { zone: zone.clone(), message: e.to_string() })?;

            let mut zone_runs = Vec::new();
            for &prune in &approaches {
                let cv_seed = zone_approach_seed(cfg.seed, zi, prune);
                let grid = GridConfig { prune: vec![prune], ..grid_base.clone() };
                let out = grid_search(&dense, &grid, cv_seed, &cv_cfg).map_err(|e| {
                    PipelineError::Zone { zone: zone.clone(), message: e.to_string() }
                })?;
                let stats = stats_report(&out.ranked, "sensitivity", 0.05);
                zone_runs.push(ZoneRun {
                    zone: zone.clone(),
                    approach: approach_number(prune),
                    cv_seed,
                    feature_names: dense.feature_names.clone(),
                    best: out.ranked.first().cloned(),
                    outcomes: out.ranked,
                    n_failed: out.failures.len(),
                    persistence: out.persistence,
                    stats,
                });
            }
            Ok(zone_runs)
        })
        .collect();

    let mut all_runs = Vec::new();
    for r in runs {
        all_runs.extend(r?);
    }

    // Per-run JSON documents.
    for run in &all_runs {
        let base = format!("{}_approach{}", run.zone.as_str(), run.approach);
        let doc = ZoneOutcomes {
            zone: run.zone.clone(),
            approach: Some(run.approach),
            cv_seed: run.cv_seed,
            manifest_id: manifest.manifest_id.clone(),
            outcomes: run.outcomes.clone(),
            n_failed_cells: run.n_failed,
        };
        write_json(&outcomes_dir.join(format!("{base}.json")), &doc)?;
        write_json(&stats_dir.join(format!("{base}.json")), &run.stats)?;
    }

    // Best-model tables, one per approach.
    for &prune in &approaches {
        let approach = approach_number(prune);
        let path = out_dir.join(format!("best_approach{approach}.csv"));
        write_best_table(&path, &manifest.manifest_id, all_runs.iter().filter(|r| r.approach == approach))?;
    }

    // Persistence table: selection frequency per (feature, zone), pooled
    // over both approaches' selection contexts.
    write_persistence(&out_dir.join("persistence.csv"), &zones, &all_runs)?;

    write_json(&out_dir.join("bayes_reference.json"), &reference)?;
    manifest
        .save(&out_dir.join("manifest.json"))
        .map_err(|e| PipelineError::Io { path: out_dir.join("manifest.json"), message: e })?;
    Ok(manifest)
}

fn approach_number(prune: bool) -> u8 {
    if prune {
        2
    } else {
        1
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)
        .map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(())
}

fn write_best_table<'a>(
    path: &Path,
    manifest_id: &str,
    runs: impl Iterator<Item = &'a ZoneRun>,
) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let header = [
        "zone",
        "correlation_quartile",
        "rf_quartile",
        "algorithm",
        "params",
        "recall_mean",
        "recall_std",
        "accuracy_mean",
        "accuracy_std",
        "kappa_mean",
        "kappa_std",
        "mean_n_features",
        "cv_seed",
        "manifest",
    ];
    w.write_record(header)
        .map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    for run in runs {
        let Some(best) = &run.best else { continue };
        let q = |v: u8| if v == 100 { "-".to_string() } else { v.to_string() };
        let (s_mean, s_std) = best
            .sensitivity
            .map(|s| (format_pct(s.mean), format_pct(s.std)))
            .unwrap_or_else(|| ("undefined".to_string(), "undefined".to_string()));
        w.write_record([
            run.zone.as_str().to_string(),
            q(best.selection.corr_quartile),
            q(best.selection.rf_quartile),
            best.spec.family().to_string(),
            best.spec.params.label(),
            s_mean,
            s_std,
            format_pct(best.accuracy.mean),
            format_pct(best.accuracy.std),
            format!("{:.2}", best.kappa.mean),
            format!("{:.2}", best.kappa.std),
            format!("{:.1}", best.mean_n_features),
            run.cv_seed.to_string(),
            manifest_id.to_string(),
        ])
        .map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn format_pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

/// Fig-10-shaped table: rows are the canonical feature layout (the
/// zone-specific Friday column reported under one shared name), columns are
/// zones, cells are the fraction of (selection context, fold) pairs that
/// kept the feature.
fn write_persistence(path: &Path, zones: &[ZoneId], runs: &[ZoneRun]) -> Result<(), PipelineError> {
    let err = |e: String| PipelineError::Io { path: path.to_path_buf(), message: e };

    // Pool approach runs per zone.
    let mut pooled: BTreeMap<&ZoneId, (Vec<usize>, usize)> = BTreeMap::new();
    for run in runs {
        let entry = pooled
            .entry(&run.zone)
            .or_insert_with(|| (vec![0; run.persistence.counts.len()], 0));
        for (i, c) in run.persistence.counts.iter().enumerate() {
            entry.0[i] += c;
        }
        entry.1 += run.persistence.total_selections;
    }

    // The column layout is shared across zones except the Friday column,
    // reported under one neutral name.
    let labels: Vec<String> = match runs.first() {
        Some(first) => {
            let mut names = first.feature_names.clone();
            if let Some(last) = names.last_mut() {
                *last = "friday_status_target".to_string();
            }
            names
        }
        None => Vec::new(),
    };

    let mut w = csv::Writer::from_path(path).map_err(|e| err(e.to_string()))?;
    let mut header = vec!["feature".to_string()];
    header.extend(zones.iter().map(|z| z.as_str().to_string()));
    w.write_record(&header).map_err(|e| err(e.to_string()))?;
    for (fi, label) in labels.iter().enumerate() {
        let mut record = vec![label.clone()];
        for zone in zones {
            let cell = pooled
                .get(zone)
                .map(|(counts, total)| {
                    if *total == 0 {
                        0.0
                    } else {
                        counts[fi] as f64 / *total as f64
                    }
                })
                .unwrap_or(0.0);
            record.push(format!("{cell:.4}"));
        }
        w.write_record(&record).map_err(|e| err(e.to_string()))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
