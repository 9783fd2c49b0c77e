//! Per-fold pipeline: feature selection and scaling are fit on the nine
//! training blocks only, then the model is trained and scored on the
//! held-out block.
//!
//! All sample access goes through [`SampleSource`], whose phase hook lets
//! tests plug in an access-recording matrix and prove that no held-out row
//! is ever read while a fold is being fitted.

use super::kfold::{kfold_split, stratified_kfold_split, FoldError};
use super::metrics::{accuracy, kappa, sensitivity, ConfusionMatrix, MetricError};
use crate::domain::{ZoneId, ZoneStatus};
use crate::featsel::{select_features, SelectionSpec};
use crate::models::{fit_state, predict_state, ModelError, ModelSpec, NbVariant};
use crate::preprocess::{LabeledMatrix, MinMaxScaler};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What the evaluation harness is doing with the data right now.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvPhase {
    /// Selection, scaling and training for the given fold: only training
    /// rows may be read.
    Fit { fold: usize },
    /// Scoring the given fold: held-out rows are read here.
    Predict { fold: usize },
}

/// Row-level access to a labelled sample set.
pub trait SampleSource: Sync {
    fn n_rows(&self) -> usize;
    fn feature_names(&self) -> &[String];
    fn zone_id(&self) -> &ZoneId;
    /// Raw (unscaled) feature row.
    fn row(&self, i: usize) -> Vec<f64>;
    fn label(&self, i: usize) -> ZoneStatus;
    /// Phase marker; production sources ignore it.
    fn note_phase(&self, _phase: CvPhase) {}
}

impl SampleSource for LabeledMatrix {
    fn n_rows(&self) -> usize {
        self.x.len()
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn zone_id(&self) -> &ZoneId {
        &self.zone_id
    }

    fn row(&self, i: usize) -> Vec<f64> {
        self.x[i].clone()
    }

    fn label(&self, i: usize) -> ZoneStatus {
        self.y[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    /// Deal closures round-robin across folds; useful for zones where plain
    /// random folds can end up without a single positive.
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 10, stratified: false }
    }
}

#[derive(Debug, Error)]
pub enum CvError {
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: ModelError },
    #[error(transparent)]
    Split(#[from] FoldError),
}

/// Metrics of one held-out fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// None when the fold holds no closures.
    pub sensitivity: Option<f64>,
    pub kappa: f64,
    pub n_features: usize,
}

/// Mean / population standard deviation / minimum over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Option<MetricSummary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        Some(MetricSummary { mean, std: var.sqrt(), min })
    }
}

/// Cross-validated result of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub zone_id: ZoneId,
    pub spec: ModelSpec,
    pub selection: SelectionSpec,
    pub cv_seed: u64,
    pub folds: Vec<FoldMetrics>,
    pub accuracy: MetricSummary,
    /// Aggregated over the folds where sensitivity is defined.
    pub sensitivity: Option<MetricSummary>,
    pub undefined_sensitivity_folds: usize,
    pub kappa: MetricSummary,
    pub mean_n_features: f64,
    /// Position in the grid's canonical enumeration; the final tie-break.
    pub canonical_index: usize,
}

/// Everything fold-specific that the model families consume. Building one
/// touches training rows under `Fit` and held-out rows under `Predict`;
/// model fitting afterwards reads only these copies.
pub(crate) struct PreparedFold {
    pub fold: usize,
    pub selected: Vec<usize>,
    pub train_scaled: Vec<Vec<f64>>,
    pub train_y: Vec<ZoneStatus>,
    pub test_scaled: Vec<Vec<f64>>,
    pub test_y: Vec<ZoneStatus>,
}

/// Deterministic per-fold seed for the selection's ranking forest.
pub(crate) fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub(crate) fn split_folds<D: SampleSource>(
    data: &D,
    cfg: &CvConfig,
    seed: u64,
) -> Result<Vec<Vec<usize>>, FoldError> {
    if cfg.stratified {
        let labels: Vec<ZoneStatus> = (0..data.n_rows()).map(|i| data.label(i)).collect();
        stratified_kfold_split(&labels, cfg.k, seed)
    } else {
        kfold_split(data.n_rows(), cfg.k, seed)
    }
}

pub(crate) fn prepare_fold<D: SampleSource>(
    data: &D,
    fold: usize,
    blocks: &[Vec<usize>],
    selection: &SelectionSpec,
    seed: u64,
) -> PreparedFold {
    let test_idx = &blocks[fold];
    let train_idx: Vec<usize> = blocks
        .iter()
        .enumerate()
        .filter(|(b, _)| *b != fold)
        .flat_map(|(_, block)| block.iter().copied())
        .collect();

    data.note_phase(CvPhase::Fit { fold });
    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| data.row(i)).collect();
    let train_y: Vec<ZoneStatus> = train_idx.iter().map(|&i| data.label(i)).collect();
    let train_matrix = LabeledMatrix {
        zone_id: data.zone_id().clone(),
        feature_names: data.feature_names().to_vec(),
        weeks: vec![crate::domain::IsoYearWeek { year: 2000, week: 1 }; train_x.len()],
        x: train_x,
        y: train_y.clone(),
    };

    let outcome = select_features(&train_matrix, selection, fold_seed(seed, fold));
    let train_sel = train_matrix.select_columns(&outcome.selected);
    let scaler = MinMaxScaler::fit(&train_sel.x);
    let train_scaled = scaler.transform(&train_sel.x);

    data.note_phase(CvPhase::Predict { fold });
    let mut test_scaled = Vec::with_capacity(test_idx.len());
    let mut test_y = Vec::with_capacity(test_idx.len());
    for &i in test_idx {
        let full = data.row(i);
        let selected_row: Vec<f64> = outcome.selected.iter().map(|&c| full[c]).collect();
        test_scaled.push(scaler.transform_row(&selected_row));
        test_y.push(data.label(i));
    }

    PreparedFold {
        fold,
        selected: outcome.selected,
        train_scaled,
        train_y,
        test_scaled,
        test_y,
    }
}

/// Count-based Naive Bayes requires non-negative inputs; unclipped min-max
/// scaling can push held-out values slightly below zero, so those variants
/// see them clamped at 0. Training rows are in [0,1] by construction.
fn adjust_for_family(spec: &ModelSpec, row: &[f64]) -> Vec<f64> {
    let clamp = matches!(
        &spec.params,
        crate::models::FamilyParams::NaiveBayes(p)
            if matches!(p.variant, NbVariant::Multinomial | NbVariant::Complement)
    );
    if clamp {
        row.iter().map(|&v| v.max(0.0)).collect()
    } else {
        row.to_vec()
    }
}

/// Fit and score one model spec on prepared folds.
pub(crate) fn evaluate_on_folds(
    zone_id: &ZoneId,
    spec: &ModelSpec,
    selection: &SelectionSpec,
    cv_seed: u64,
    folds: &[PreparedFold],
) -> Result<EvalOutcome, CvError> {
    let mut fold_metrics = Vec::with_capacity(folds.len());
    for pf in folds {
        let state = fit_state(spec, &pf.train_scaled, &pf.train_y)
            .map_err(|source| CvError::Fold { fold: pf.fold, source })?;
        let mut cm = ConfusionMatrix::default();
        for (row, &label) in pf.test_scaled.iter().zip(&pf.test_y) {
            let input = adjust_for_family(spec, row);
            let (pred, _) = predict_state(&state, &input)
                .map_err(|source| CvError::Fold { fold: pf.fold, source })?;
            cm.record(label, pred);
        }
        let acc = accuracy(&cm).expect("folds are non-empty");
        let sens = match sensitivity(&cm) {
            Ok(v) => Some(v),
            Err(MetricError::NoPositives) => None,
            Err(e) => unreachable!("non-empty fold: {e}"),
        };
        let kap = kappa(&cm).expect("folds are non-empty");
        fold_metrics.push(FoldMetrics {
            fold: pf.fold,
            confusion: cm,
            accuracy: acc,
            sensitivity: sens,
            kappa: kap,
            n_features: pf.selected.len(),
        });
    }

    let acc_summary =
        MetricSummary::from_values(&fold_metrics.iter().map(|f| f.accuracy).collect::<Vec<_>>())
            .expect("at least one fold");
    let sens_values: Vec<f64> = fold_metrics.iter().filter_map(|f| f.sensitivity).collect();
    let undefined = fold_metrics.len() - sens_values.len();
    if undefined > 0 {
        log::warn!(
            "{zone_id}: {undefined} fold(s) without closures; sensitivity mean covers {} fold(s)",
            sens_values.len()
        );
    }
    let sens_summary = MetricSummary::from_values(&sens_values);
    let kappa_summary =
        MetricSummary::from_values(&fold_metrics.iter().map(|f| f.kappa).collect::<Vec<_>>())
            .expect("at least one fold");
    let mean_n_features = fold_metrics.iter().map(|f| f.n_features as f64).sum::<f64>()
        / fold_metrics.len() as f64;

    Ok(EvalOutcome {
        zone_id: zone_id.clone(),
        spec: spec.clone(),
        selection: *selection,
        cv_seed,
        folds: fold_metrics,
        accuracy: acc_summary,
        sensitivity: sens_summary,
        undefined_sensitivity_folds: undefined,
        kappa: kappa_summary,
        mean_n_features,
        canonical_index: 0,
    })
}

/// Evaluate one (model, selection) cell under k-fold cross-validation.
pub fn cross_validate<D: SampleSource>(
    data: &D,
    spec: &ModelSpec,
    selection: &SelectionSpec,
    seed: u64,
    cfg: &CvConfig,
) -> Result<EvalOutcome, CvError> {
    let blocks = split_folds(data, cfg, seed)?;
    let folds: Vec<PreparedFold> = (0..blocks.len())
        .map(|f| prepare_fold(data, f, &blocks, selection, seed))
        .collect();
    evaluate_on_folds(data.zone_id(), spec, selection, seed, &folds)
}
