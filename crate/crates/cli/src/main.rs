//! `habgate`: the command-line front end for the closure-forecasting
//! pipeline.
//!
//! Exit codes: 0 success, 1 validation findings or invalid user input,
//! 2 I/O error, 3 internal invariant violation.

use clap::{Parser, Subcommand};
use habgate_core::domain::{ZoneId, ZoneStatus};
use habgate_core::eval::{grid_search, CvConfig, GridConfig};
use habgate_core::featsel::selection_report;
use habgate_core::ingest::{
    parse_meteo_csv, parse_station_csv, parse_upwelling_csv, parse_zone_status_csv,
    validate_dataset, Dataset, IngestError,
};
use habgate_core::models::{
    FamilyParams, KnnParams, MlpParams, ModelSpec, NaiveBayesParams, NbVariant,
    RandomForestParams, TrainedModel,
};
use habgate_core::pipeline::{
    parse_key_values, predict_row, run_pipeline, stats_report, PipelineConfig, PredictError,
    ZoneOutcomes,
};
use habgate_core::preprocess::{
    assemble_zone_matrix, drop_null_rows, load_design_matrix, save_design_matrix,
};
use habgate_core::synth::{generate, GeneratorConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "habgate", version, about = "Weekly open/closed forecasting for mussel production areas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic raw dataset (four CSV source files).
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 15)]
        years: u32,
        /// Flat key-value generator config; CLI flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate the four raw source files into one dataset.
    Ingest {
        #[arg(long)]
        stations: PathBuf,
        #[arg(long)]
        meteo: PathBuf,
        #[arg(long)]
        upwelling: PathBuf,
        #[arg(long)]
        status: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble per-zone design matrices from an ingested dataset.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        /// Zone name or "all".
        #[arg(long, default_value = "all")]
        zone: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlation pruning and both feature rankings for one matrix.
    Select {
        /// Matrix base path (without extension) as written by preprocess.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0.90)]
        prune_threshold: f64,
        #[arg(long, default_value = "both")]
        method: String,
        #[arg(long)]
        quartile: Option<u8>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Train one configuration on the complete rows of a matrix.
    Train {
        #[arg(long)]
        matrix: PathBuf,
        /// knn | nb | rf | ann
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: Option<usize>,
        /// gaussian | multinomial | complement | bernoulli
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        trees: Option<usize>,
        /// Hidden layer sizes, comma separated (e.g. 10,10).
        #[arg(long)]
        hidden: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated grid search over one matrix.
    Evaluate {
        #[arg(long)]
        matrix: PathBuf,
        /// desk | full | path to a grid JSON file.
        #[arg(long, default_value = "desk")]
        grid: String,
        /// off | on | both
        #[arg(long, default_value = "both")]
        prune: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        stratified: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normality / ANOVA / Tukey-Kramer comparison of the per-family bests.
    Stats {
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long, default_value = "sensitivity")]
        metric: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: synthesize, evaluate every zone, write the bundle.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one feature row with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// JSON object mapping feature names to values.
        #[arg(long)]
        row: PathBuf,
    },
}

/// Failure category that maps onto the process exit code.
enum CliError {
    Validation(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

fn ingest_error(e: IngestError) -> CliError {
    match e {
        IngestError::Io { .. } => CliError::Io(e.to_string()),
        IngestError::Serialization { .. } => CliError::Io(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Synth { seed, years, config, out } => {
            let mut gen = GeneratorConfig::paper_scale(seed);
            gen.n_years = years;
            if let Some(path) = config {
                let kv = parse_key_values(&read_to_string(&path)?)
                    .map_err(CliError::Validation)?;
                gen.apply_key_values(&kv).map_err(CliError::Validation)?;
                gen.seed = seed;
                gen.n_years = years;
            }
            let data = generate(&gen).map_err(CliError::Validation)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            data.write_files(&out).map_err(ingest_error)?;
            println!(
                "wrote {} station-weeks, {} meteo days, {} upwelling days, {} status days to {}",
                data.dataset.station_weeks.len(),
                data.dataset.meteo.len(),
                data.dataset.upwelling.len(),
                data.dataset.status.len(),
                out.display()
            );
            Ok(0)
        }

        Command::Ingest { stations, meteo, upwelling, status, out } => {
            let station_ids: Vec<_> = habgate_core::domain::DEFAULT_STATIONS
                .iter()
                .map(|s| habgate_core::domain::StationId::from(*s))
                .collect();
            let zone_ids: Vec<_> = habgate_core::domain::DEFAULT_ZONES
                .iter()
                .map(|z| ZoneId::from(*z))
                .collect();
            let dataset = Dataset {
                station_weeks: parse_station_csv(&stations, &station_ids)
                    .map_err(ingest_error)?,
                meteo: parse_meteo_csv(&meteo).map_err(ingest_error)?,
                upwelling: parse_upwelling_csv(&upwelling).map_err(ingest_error)?,
                status: parse_zone_status_csv(&status, &zone_ids).map_err(ingest_error)?,
                stations: station_ids,
                zones: zone_ids,
            };
            let report = validate_dataset(&dataset);
            dataset.save(&out).map_err(ingest_error)?;
            println!(
                "dataset written to {} ({} station-weeks, {} findings)",
                out.display(),
                dataset.station_weeks.len(),
                report.findings.len()
            );
            for finding in report.findings.iter().take(20) {
                println!("finding: {finding:?}");
            }
            if report.findings.len() > 20 {
                println!("... and {} more", report.findings.len() - 20);
            }
            Ok(u8::from(report.has_findings()))
        }

        Command::Preprocess { input, zone, out } => {
            let dataset = Dataset::load(&input).map_err(ingest_error)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            let zones: Vec<ZoneId> = if zone == "all" {
                dataset.zones.clone()
            } else {
                vec![ZoneId::from(zone.as_str())]
            };
            for z in &zones {
                let matrix = assemble_zone_matrix(&dataset, z)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                let complete = drop_null_rows(&matrix);
                save_design_matrix(&out.join(z.as_str()), &matrix)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                println!(
                    "{z}: {} rows ({} complete) x {} features",
                    matrix.n_rows(),
                    complete.n_rows(),
                    matrix.n_features()
                );
                if complete.n_rows() == 0 {
                    log::warn!("{z}: no complete rows survive null filtering");
                }
            }
            Ok(0)
        }

        Command::Select { matrix, prune_threshold, method, quartile, seed, report } => {
            let design = load_design_matrix(&matrix).map_err(|e| CliError::Io(e.to_string()))?;
            let dense = drop_null_rows(&design)
                .to_labeled()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            if (prune_threshold - 0.90).abs() > 1e-12 {
                log::warn!("non-default prune threshold {prune_threshold} is informational; the report always uses 0.90");
            }
            let full = selection_report(&dense, seed);
            let doc = serde_json::to_string_pretty(&full)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            std::fs::write(&report, doc)
                .map_err(|e| CliError::Io(format!("{}: {e}", report.display())))?;
            if let Some(pct) = quartile {
                let chosen = match method.as_str() {
                    "corr" => full.correlation_subsets.get(&pct),
                    "rf" => full.rf_subsets.get(&pct),
                    _ => None,
                };
                if let Some(features) = chosen {
                    for f in features {
                        println!("{f}");
                    }
                }
            }
            println!("selection report written to {}", report.display());
            Ok(0)
        }

        Command::Train { matrix, family, k, variant, trees, hidden, epochs, seed, out } => {
            let design = load_design_matrix(&matrix).map_err(|e| CliError::Io(e.to_string()))?;
            let dense = drop_null_rows(&design)
                .to_labeled()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let params = build_params(&family, k, variant, trees, hidden, epochs)?;
            let spec = ModelSpec { params, seed };
            let model = TrainedModel::fit(&spec, dense.feature_names.clone(), &dense.x, &dense.y)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            model.save(&out).map_err(CliError::Io)?;
            println!(
                "trained {} on {} rows x {} features -> {}",
                spec.params.label(),
                dense.n_rows(),
                dense.n_features(),
                out.display()
            );
            Ok(0)
        }

        Command::Evaluate { matrix, grid, prune, seed, stratified, out } => {
            let design = load_design_matrix(&matrix).map_err(|e| CliError::Io(e.to_string()))?;
            let dense = drop_null_rows(&design)
                .to_labeled()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let prune_modes = match prune.as_str() {
                "off" => vec![false],
                "on" => vec![true],
                "both" => vec![false, true],
                other => {
                    return Err(CliError::Validation(format!(
                        "prune must be off/on/both, got {other:?}"
                    )))
                }
            };
            let base = load_grid(&grid)?;
            let grid_cfg = GridConfig { prune: prune_modes, ..base };
            let cv = CvConfig { k: 10, stratified };
            let result = grid_search(&dense, &grid_cfg, seed, &cv)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let doc = ZoneOutcomes {
                zone: dense.zone_id.clone(),
                approach: approach_tag(&grid_cfg.prune),
                cv_seed: seed,
                manifest_id: String::new(),
                n_failed_cells: result.failures.len(),
                outcomes: result.ranked,
            };
            let json = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            std::fs::write(&out, json)
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            if let Some(best) = doc.outcomes.first() {
                println!(
                    "best: {} {} sensitivity={} accuracy={:.4}",
                    best.spec.params.label(),
                    best.selection.label(),
                    best.sensitivity.map_or("undef".to_string(), |s| format!("{:.4}", s.mean)),
                    best.accuracy.mean
                );
            }
            println!(
                "{} outcomes ({} failed cells) written to {}",
                doc.outcomes.len(),
                doc.n_failed_cells,
                out.display()
            );
            Ok(0)
        }

        Command::Stats { outcomes, metric, alpha, out } => {
            if !matches!(metric.as_str(), "sensitivity" | "accuracy" | "kappa") {
                return Err(CliError::Validation(format!(
                    "metric must be sensitivity/accuracy/kappa, got {metric:?}"
                )));
            }
            let text = read_to_string(&outcomes)?;
            let doc: ZoneOutcomes = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", outcomes.display())))?;
            let report = stats_report(&doc.outcomes, &metric, alpha);
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            std::fs::write(&out, json)
                .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            println!("stats written to {}", out.display());
            Ok(0)
        }

        Command::Report { config, seed, out } => {
            let config_text = match &config {
                Some(path) => read_to_string(path)?,
                None => String::new(),
            };
            let mut cfg = PipelineConfig::from_key_values(&config_text)
                .map_err(CliError::Validation)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let manifest = run_pipeline(&cfg, &config_text, &out).map_err(|e| match e {
                habgate_core::pipeline::PipelineError::Io { .. } => CliError::Io(e.to_string()),
                habgate_core::pipeline::PipelineError::Config(m) => CliError::Validation(m),
                habgate_core::pipeline::PipelineError::Zone { .. } => {
                    CliError::Internal(e.to_string())
                }
            })?;
            println!("report bundle {} written to {}", manifest.manifest_id, out.display());
            Ok(0)
        }

        Command::Predict { model, row } => {
            let model = TrainedModel::load(&model).map_err(CliError::Io)?;
            let text = read_to_string(&row)?;
            let values: BTreeMap<String, f64> = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", row.display())))?;
            let prediction = predict_row(&model, &values).map_err(|e| match e {
                PredictError::FeatureMismatch { .. } => CliError::Validation(e.to_string()),
                PredictError::Model(_) => CliError::Validation(e.to_string()),
            })?;
            let json = serde_json::to_string_pretty(&prediction)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            println!("{json}");
            if prediction.label == ZoneStatus::Closed {
                log::info!("prediction: CLOSED");
            }
            Ok(0)
        }
    }
}

fn approach_tag(prune: &[bool]) -> Option<u8> {
    match prune {
        [false] => Some(1),
        [true] => Some(2),
        _ => None,
    }
}

fn load_grid(arg: &str) -> Result<GridConfig, CliError> {
    match arg {
        "desk" => Ok(GridConfig::desk()),
        "full" => Ok(GridConfig::full()),
        path => {
            let text = read_to_string(Path::new(path))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{path}: {e}")))
        }
    }
}

fn build_params(
    family: &str,
    k: Option<usize>,
    variant: Option<String>,
    trees: Option<usize>,
    hidden: Option<String>,
    epochs: Option<usize>,
) -> Result<FamilyParams, CliError> {
    match family {
        "knn" => Ok(FamilyParams::Knn(KnnParams { k: k.unwrap_or(2) })),
        "nb" => {
            let variant = match variant.as_deref().unwrap_or("gaussian") {
                "gaussian" => NbVariant::Gaussian,
                "multinomial" => NbVariant::Multinomial,
                "complement" => NbVariant::Complement,
                "bernoulli" => NbVariant::Bernoulli,
                other => {
                    return Err(CliError::Validation(format!("unknown NB variant {other:?}")))
                }
            };
            Ok(FamilyParams::NaiveBayes(NaiveBayesParams { variant }))
        }
        "rf" => Ok(FamilyParams::RandomForest(RandomForestParams {
            n_trees: trees.unwrap_or(100),
        })),
        "ann" => {
            let hidden: Vec<usize> = hidden
                .as_deref()
                .unwrap_or("8")
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| CliError::Validation(format!("bad hidden size {p:?}")))
                })
                .collect::<Result<_, _>>()?;
            let mut params = MlpParams::with_hidden(hidden);
            if let Some(e) = epochs {
                params.epochs = e;
            }
            Ok(FamilyParams::Mlp(params))
        }
        other => Err(CliError::Validation(format!(
            "family must be knn/nb/rf/ann, got {other:?}"
        ))),
    }
}
