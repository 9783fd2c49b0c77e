//! Evaluation: confusion-matrix metrics, cross-validation folds, grid
//! search and best-model selection.

pub mod cv;
pub mod grid;
pub mod kfold;
pub mod metrics;

pub use cv::{
    cross_validate, CvConfig, CvError, CvPhase, EvalOutcome, FoldMetrics, MetricSummary,
    SampleSource,
};
pub use grid::{grid_search, outcome_order, select_best, GridConfig, GridOutcome};
pub use kfold::{kfold_split, stratified_kfold_split, FoldError};
pub use metrics::{accuracy, kappa, sensitivity, ConfusionMatrix, MetricError};
