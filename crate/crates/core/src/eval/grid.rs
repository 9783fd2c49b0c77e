//! Grid-search orchestration and best-model selection.

use super::cv::{
    evaluate_on_folds, prepare_fold, split_folds, CvConfig, CvError, EvalOutcome, PreparedFold,
    SampleSource,
};
use crate::featsel::SelectionSpec;
use crate::models::{
    FamilyParams, KnnParams, MlpParams, ModelSpec, NaiveBayesParams, NbVariant,
    RandomForestParams,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// The hyperparameter and selection space to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub knn_k: Vec<usize>,
    pub nb_variants: Vec<NbVariant>,
    pub rf_trees: Vec<usize>,
    pub mlp_hidden: Vec<Vec<usize>>,
    pub mlp_epochs: usize,
    /// Quartile values for both rankers; 100 = ranker off.
    pub quartiles: Vec<u8>,
    pub prune: Vec<bool>,
}

impl GridConfig {
    /// The full grid: every family parameter swept in the study.
    pub fn full() -> GridConfig {
        GridConfig {
            knn_k: (1..=10).collect(),
            nb_variants: vec![
                NbVariant::Gaussian,
                NbVariant::Multinomial,
                NbVariant::Complement,
                NbVariant::Bernoulli,
            ],
            rf_trees: vec![100, 500, 1000, 1500, 2000],
            mlp_hidden: vec![vec![2], vec![8], vec![14], vec![10, 10], vec![10, 20]],
            mlp_epochs: 10,
            quartiles: vec![25, 50, 75, 100],
            prune: vec![false, true],
        }
    }

    /// Desk-scale grid: the forest sizes are reduced to {100, 500}.
    pub fn desk() -> GridConfig {
        GridConfig { rf_trees: vec![100, 500], ..GridConfig::full() }
    }

    /// Selection contexts in canonical order.
    pub fn selection_specs(&self) -> Vec<SelectionSpec> {
        let mut specs = Vec::new();
        for &prune in &self.prune {
            for &corr in &self.quartiles {
                for &rf in &self.quartiles {
                    specs.push(SelectionSpec { prune, corr_quartile: corr, rf_quartile: rf });
                }
            }
        }
        specs
    }

    /// Model specs in canonical family order: kNN, NB, RF, ANN.
    pub fn model_specs(&self, seed: u64) -> Vec<ModelSpec> {
        let mut specs = Vec::new();
        for &k in &self.knn_k {
            specs.push(ModelSpec { params: FamilyParams::Knn(KnnParams { k }), seed });
        }
        for &variant in &self.nb_variants {
            specs.push(ModelSpec {
                params: FamilyParams::NaiveBayes(NaiveBayesParams { variant }),
                seed,
            });
        }
        for &n_trees in &self.rf_trees {
            specs.push(ModelSpec {
                params: FamilyParams::RandomForest(RandomForestParams { n_trees }),
                seed,
            });
        }
        for hidden in &self.mlp_hidden {
            specs.push(ModelSpec {
                params: FamilyParams::Mlp(MlpParams {
                    epochs: self.mlp_epochs,
                    ..MlpParams::with_hidden(hidden.clone())
                }),
                seed,
            });
        }
        specs
    }

    pub fn n_cells(&self) -> usize {
        self.selection_specs().len() * self.model_specs(0).len()
    }
}

/// A grid cell whose evaluation failed, kept for the report.
#[derive(Debug, Serialize)]
pub struct FailedCell {
    pub selection: SelectionSpec,
    pub spec: ModelSpec,
    pub error: String,
}

/// Feature-usage bookkeeping: how often each feature survived selection,
/// over every (selection context, fold) pair of the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeaturePersistence {
    pub counts: Vec<usize>,
    pub total_selections: usize,
}

pub struct GridOutcome {
    /// Successful cells ranked best-first by [`outcome_order`].
    pub ranked: Vec<EvalOutcome>,
    pub failures: Vec<FailedCell>,
    pub persistence: FeaturePersistence,
}

/// Evaluate every (selection context x model spec) cell under shared folds.
///
/// Selections and scalers are computed once per (context, fold) and reused
/// across the model specs, which is exactly what per-cell `cross_validate`
/// would do; results are identical cell by cell. Cells run in parallel and
/// are merged in canonical order.
pub fn grid_search<D: SampleSource>(
    data: &D,
    grid: &GridConfig,
    seed: u64,
    cfg: &CvConfig,
) -> Result<GridOutcome, CvError> {
    let blocks = split_folds(data, cfg, seed)?;
    let selections = grid.selection_specs();
    let models = grid.model_specs(seed);

    // Selection contexts are independent jobs; rayon's ordered collect
    // keeps the merge deterministic regardless of completion order.
    let per_context: Vec<(Vec<Result<EvalOutcome, CvError>>, Vec<usize>)> = selections
        .par_iter()
        .map(|selection| {
            // Fold preparation reads the data; model fits below only read
            // the prepared copies.
            let folds: Vec<PreparedFold> = (0..blocks.len())
                .into_par_iter()
                .map(|f| prepare_fold(data, f, &blocks, selection, seed))
                .collect();
            let mut counts = vec![0usize; data.feature_names().len()];
            for fold in &folds {
                for &col in &fold.selected {
                    counts[col] += 1;
                }
            }
            let results: Vec<Result<EvalOutcome, CvError>> = models
                .par_iter()
                .map(|spec| evaluate_on_folds(data.zone_id(), spec, selection, seed, &folds))
                .collect();
            (results, counts)
        })
        .collect();

    let mut persistence = FeaturePersistence {
        counts: vec![0; data.feature_names().len()],
        total_selections: 0,
    };
    let mut ranked = Vec::with_capacity(grid.n_cells());
    let mut failures = Vec::new();
    let mut canonical_index = 0;
    for (selection, (results, counts)) in selections.iter().zip(per_context) {
        persistence.total_selections += blocks.len();
        for (col, c) in counts.into_iter().enumerate() {
            persistence.counts[col] += c;
        }
        for (spec, result) in models.iter().zip(results) {
            match result {
                Ok(mut outcome) => {
                    outcome.canonical_index = canonical_index;
                    ranked.push(outcome);
                }
                Err(e) => {
                    log::warn!(
                        "grid cell failed ({} / {}): {e}",
                        selection.label(),
                        spec.params.label()
                    );
                    failures.push(FailedCell {
                        selection: *selection,
                        spec: spec.clone(),
                        error: e.to_string(),
                    });
                }
            }
            canonical_index += 1;
        }
    }

    ranked.sort_by(outcome_order);
    Ok(GridOutcome { ranked, failures, persistence })
}

/// Lexicographic model preference: mean sensitivity (descending), mean
/// accuracy, mean kappa, fewer input features, canonical grid position.
pub fn outcome_order(a: &EvalOutcome, b: &EvalOutcome) -> Ordering {
    let sens = |o: &EvalOutcome| o.sensitivity.map(|s| s.mean);
    // An outcome with no defined sensitivity folds ranks below any defined one.
    match (sens(a), sens(b)) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
    .then_with(|| b.accuracy.mean.total_cmp(&a.accuracy.mean))
    .then_with(|| b.kappa.mean.total_cmp(&a.kappa.mean))
    .then_with(|| a.mean_n_features.total_cmp(&b.mean_n_features))
    .then_with(|| a.canonical_index.cmp(&b.canonical_index))
}

/// The winning outcome under [`outcome_order`].
pub fn select_best(outcomes: &[EvalOutcome]) -> Option<&EvalOutcome> {
    outcomes.iter().min_by(|a, b| outcome_order(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ZoneStatus;
    use crate::eval::cv::cross_validate;
    use crate::eval::MetricSummary;
    use crate::featsel::matrix_from_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn outcome(sens: f64, acc: f64, kappa: f64, feats: f64, idx: usize) -> EvalOutcome {
        EvalOutcome {
            zone_id: crate::domain::ZoneId::from("z"),
            spec: ModelSpec { params: FamilyParams::Knn(KnnParams { k: 1 }), seed: 0 },
            selection: SelectionSpec { prune: false, corr_quartile: 100, rf_quartile: 100 },
            cv_seed: 0,
            folds: Vec::new(),
            accuracy: MetricSummary { mean: acc, std: 0.0, min: acc },
            sensitivity: Some(MetricSummary { mean: sens, std: 0.0, min: sens }),
            undefined_sensitivity_folds: 0,
            kappa: MetricSummary { mean: kappa, std: 0.0, min: kappa },
            mean_n_features: feats,
            canonical_index: idx,
        }
    }

    #[test]
    fn sensitivity_outranks_accuracy() {
        let a = outcome(0.99, 0.50, 0.1, 76.0, 0);
        let b = outcome(0.95, 0.99, 0.9, 19.0, 1);
        let pool = [a, b];
        let best = select_best(&pool).unwrap();
        assert_eq!(best.canonical_index, 0);
    }

    #[test]
    fn fewer_features_break_metric_ties() {
        let a = outcome(0.9, 0.9, 0.5, 57.0, 0);
        let b = outcome(0.9, 0.9, 0.5, 19.0, 1);
        let pool = [a, b];
        let best = select_best(&pool).unwrap();
        assert_eq!(best.canonical_index, 1);
    }

    #[test]
    fn full_tie_falls_back_to_canonical_order() {
        let a = outcome(0.9, 0.9, 0.5, 19.0, 3);
        let b = outcome(0.9, 0.9, 0.5, 19.0, 7);
        let pool = [b, a];
        let best = select_best(&pool).unwrap();
        assert_eq!(best.canonical_index, 3);
    }

    fn small_matrix(n: usize) -> crate::preprocess::LabeledMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let y: Vec<ZoneStatus> = (0..n)
            .map(|_| if rng.gen_bool(0.45) { ZoneStatus::Closed } else { ZoneStatus::Open })
            .collect();
        let x: Vec<Vec<f64>> = y
            .iter()
            .map(|l| {
                vec![
                    l.encode() + rng.gen_range(-0.4..0.4),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                ]
            })
            .collect();
        matrix_from_dense((0..3).map(|i| format!("f{i}")).collect(), x, y)
    }

    #[test]
    fn grid_matches_standalone_cross_validation() {
        let m = small_matrix(60);
        let grid = GridConfig {
            knn_k: vec![1, 3],
            nb_variants: vec![NbVariant::Gaussian, NbVariant::Bernoulli],
            rf_trees: vec![20],
            mlp_hidden: vec![vec![2]],
            mlp_epochs: 5,
            quartiles: vec![50, 100],
            prune: vec![false, true],
        };
        let seed = 9;
        let out = grid_search(&m, &grid, seed, &CvConfig::default()).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.ranked.len(), grid.n_cells());

        // Spot-check several cells against the per-cell path.
        for probe in [0usize, 5, 11, 17] {
            let cell = &out.ranked[probe];
            let standalone =
                cross_validate(&m, &cell.spec, &cell.selection, seed, &CvConfig::default())
                    .unwrap();
            assert_eq!(cell.folds, standalone.folds, "cell {probe}");
            assert_eq!(cell.accuracy, standalone.accuracy);
            assert_eq!(cell.sensitivity, standalone.sensitivity);
        }
    }

    #[test]
    fn grid_is_deterministic() {
        let m = small_matrix(50);
        let grid = GridConfig {
            knn_k: vec![2],
            nb_variants: vec![NbVariant::Gaussian],
            rf_trees: vec![15],
            mlp_hidden: vec![],
            mlp_epochs: 5,
            quartiles: vec![50, 100],
            prune: vec![false],
        };
        let a = grid_search(&m, &grid, 4, &CvConfig::default()).unwrap();
        let b = grid_search(&m, &grid, 4, &CvConfig::default()).unwrap();
        assert_eq!(a.ranked, b.ranked);
        assert_eq!(a.persistence, b.persistence);
    }

    #[test]
    fn persistence_counts_every_fold_selection() {
        let m = small_matrix(50);
        let grid = GridConfig {
            knn_k: vec![1],
            nb_variants: vec![],
            rf_trees: vec![],
            mlp_hidden: vec![],
            mlp_epochs: 5,
            quartiles: vec![100],
            prune: vec![false],
        };
        let out = grid_search(&m, &grid, 1, &CvConfig::default()).unwrap();
        // One selection context, ten folds, no filtering: every feature
        // survives all ten selections.
        assert_eq!(out.persistence.total_selections, 10);
        assert_eq!(out.persistence.counts, vec![10, 10, 10]);
    }
}
