//! Feature selection: correlation pruning, the two ranking methods, and
//! quartile subset construction.
//!
//! The full pipeline applies them in a fixed order on training data only:
//! optional >90% correlation pruning, then the correlation-filter quartile,
//! then the Random-Forest-importance quartile on the survivors. A quartile
//! of 100 means "ranker not applied".

use crate::domain::ZoneStatus;
use crate::models::{RandomForest, RandomForestParams};
use crate::preprocess::LabeledMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default |Pearson r| threshold for pruning.
pub const PRUNE_THRESHOLD: f64 = 0.90;

/// Trees used by the embedded ranking forest.
pub const RANKING_FOREST_TREES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankMethod {
    CorrelationFilter,
    RandomForestEmbedded,
}

/// Features ordered by a ranking method, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub method: RankMethod,
    /// (feature name, score) descending; ties keep canonical column order.
    pub ordered: Vec<(String, f64)>,
}

impl FeatureRanking {
    pub fn names(&self) -> Vec<String> {
        self.ordered.iter().map(|(n, _)| n.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedPair {
    pub kept: String,
    pub dropped: String,
    pub abs_r: f64,
}

/// Which features survived selection for one zone, plus the quartile
/// subsets of both rankers on the pruned matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub zone_id: crate::domain::ZoneId,
    pub pruned_pairs: Vec<PrunedPair>,
    pub correlation_subsets: BTreeMap<u8, Vec<String>>,
    pub rf_subsets: BTreeMap<u8, Vec<String>>,
}

/// Pearson correlation with the zero-variance convention: any correlation
/// involving a constant column is 0.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Drop the later column of every pair correlated beyond `threshold`.
///
/// One forward pass in canonical column order is already a fixpoint: every
/// surviving pair has been checked against each other, so applying the
/// operation twice changes nothing.
pub fn prune_correlated(
    matrix: &LabeledMatrix,
    threshold: f64,
) -> (LabeledMatrix, Vec<PrunedPair>) {
    let d = matrix.n_features();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|j| matrix.x.iter().map(|row| row[j]).collect())
        .collect();

    let mut dropped = vec![false; d];
    let mut pairs = Vec::new();
    for i in 0..d {
        if dropped[i] {
            continue;
        }
        for j in (i + 1)..d {
            if dropped[j] {
                continue;
            }
            let r = pearson(&columns[i], &columns[j]).abs();
            if r > threshold {
                dropped[j] = true;
                pairs.push(PrunedPair {
                    kept: matrix.feature_names[i].clone(),
                    dropped: matrix.feature_names[j].clone(),
                    abs_r: r,
                });
            }
        }
    }
    let keep: Vec<usize> = (0..d).filter(|&j| !dropped[j]).collect();
    (matrix.select_columns(&keep), pairs)
}

/// Filter ranking: |point-biserial correlation| with the binary label,
/// descending. Point-biserial is Pearson against the {0,1} encoding.
pub fn rank_by_target_correlation(matrix: &LabeledMatrix) -> FeatureRanking {
    let y01: Vec<f64> = matrix.y.iter().map(|l| l.encode()).collect();
    let scores: Vec<f64> = (0..matrix.n_features())
        .map(|j| {
            let col: Vec<f64> = matrix.x.iter().map(|row| row[j]).collect();
            pearson(&col, &y01).abs()
        })
        .collect();
    ranked(matrix, scores, RankMethod::CorrelationFilter)
}

/// Embedded ranking: mean Gini impurity decrease across a seeded forest.
pub fn rank_by_rf_importance(
    matrix: &LabeledMatrix,
    params: &RandomForestParams,
    seed: u64,
) -> FeatureRanking {
    let forest = RandomForest::fit(&matrix.x, &matrix.y, params, seed)
        .expect("ranking forest on non-empty matrix");
    ranked(matrix, forest.feature_importances().to_vec(), RankMethod::RandomForestEmbedded)
}

fn ranked(matrix: &LabeledMatrix, scores: Vec<f64>, method: RankMethod) -> FeatureRanking {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Stable descending sort: ties keep canonical feature order.
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    FeatureRanking {
        method,
        ordered: order
            .into_iter()
            .map(|j| (matrix.feature_names[j].clone(), scores[j]))
            .collect(),
    }
}

/// Top ceil(pct% of the ranking); pct = 100 returns everything.
pub fn take_quartile(ranking: &FeatureRanking, pct: u8) -> Vec<String> {
    let n = ranking.ordered.len();
    let keep = (n * usize::from(pct)).div_ceil(100).min(n);
    ranking.ordered[..keep].iter().map(|(name, _)| name.clone()).collect()
}

/// One grid cell's selection configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionSpec {
    /// Apply >90% correlation pruning first (the second-approach stage).
    pub prune: bool,
    /// Correlation-filter quartile: 25, 50, 75, or 100 for "not applied".
    pub corr_quartile: u8,
    /// RF-importance quartile on the correlation survivors.
    pub rf_quartile: u8,
}

impl SelectionSpec {
    pub fn label(&self) -> String {
        let q = |v: u8| if v == 100 { "-".to_string() } else { v.to_string() };
        format!(
            "prune={} corr={} rf={}",
            if self.prune { "on" } else { "off" },
            q(self.corr_quartile),
            q(self.rf_quartile)
        )
    }
}

/// Outcome of running a [`SelectionSpec`] on a training matrix: the
/// surviving column indices of the input matrix, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub selected: Vec<usize>,
    pub pruned_pairs: Vec<PrunedPair>,
}

/// Run the full selection chain on (training) data.
pub fn select_features(
    train: &LabeledMatrix,
    spec: &SelectionSpec,
    rank_seed: u64,
) -> SelectionOutcome {
    let (mut current, pruned_pairs) = if spec.prune {
        prune_correlated(train, PRUNE_THRESHOLD)
    } else {
        (train.clone(), Vec::new())
    };

    if spec.corr_quartile < 100 {
        let ranking = rank_by_target_correlation(&current);
        let keep = take_quartile(&ranking, spec.corr_quartile);
        current = restrict_to(&current, &keep);
    }
    if spec.rf_quartile < 100 {
        let ranking = rank_by_rf_importance(
            &current,
            &RandomForestParams { n_trees: RANKING_FOREST_TREES },
            rank_seed,
        );
        let keep = take_quartile(&ranking, spec.rf_quartile);
        current = restrict_to(&current, &keep);
    }

    // Map surviving names back to canonical input column indices.
    let selected: Vec<usize> = train
        .feature_names
        .iter()
        .enumerate()
        .filter(|(_, name)| current.feature_names.contains(name))
        .map(|(j, _)| j)
        .collect();
    SelectionOutcome { selected, pruned_pairs }
}

fn restrict_to(matrix: &LabeledMatrix, names: &[String]) -> LabeledMatrix {
    let cols: Vec<usize> = matrix
        .feature_names
        .iter()
        .enumerate()
        .filter(|(_, n)| names.contains(n))
        .map(|(j, _)| j)
        .collect();
    matrix.select_columns(&cols)
}

/// Build the standalone selection report for one zone's complete matrix.
pub fn selection_report(matrix: &LabeledMatrix, seed: u64) -> SelectionReport {
    let (pruned, pruned_pairs) = prune_correlated(matrix, PRUNE_THRESHOLD);
    let corr = rank_by_target_correlation(&pruned);
    let rf = rank_by_rf_importance(
        &pruned,
        &RandomForestParams { n_trees: RANKING_FOREST_TREES },
        seed,
    );
    let mut correlation_subsets = BTreeMap::new();
    let mut rf_subsets = BTreeMap::new();
    for pct in [25u8, 50, 75] {
        correlation_subsets.insert(pct, take_quartile(&corr, pct));
        rf_subsets.insert(pct, take_quartile(&rf, pct));
    }
    SelectionReport {
        zone_id: matrix.zone_id.clone(),
        pruned_pairs,
        correlation_subsets,
        rf_subsets,
    }
}

/// Convenience used by tests and the generator-facing checks.
pub fn matrix_from_dense(
    names: Vec<String>,
    x: Vec<Vec<f64>>,
    y: Vec<ZoneStatus>,
) -> LabeledMatrix {
    let weeks = (0..x.len())
        .map(|i| crate::domain::IsoYearWeek { year: 2000, week: (i % 52 + 1) as u32 })
        .collect();
    LabeledMatrix {
        zone_id: crate::domain::ZoneId::from("test"),
        feature_names: names,
        x,
        y,
        weeks,
    }
}
