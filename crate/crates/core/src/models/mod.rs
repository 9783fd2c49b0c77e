//! The four classifier families and their grid-search parameter spaces.
//!
//! Every family resolves prediction ties toward Closed: missing a real
//! closure is the costly error, so the safe side wins whenever the evidence
//! is balanced.

pub mod knn;
pub mod mlp;
pub mod nb;
pub mod rf;

pub use knn::KnnClassifier;
pub use mlp::{Mlp, MlpParams};
pub use nb::{NaiveBayesClassifier, NbVariant};
pub use rf::{RandomForest, RandomForestParams};

use crate::domain::ZoneStatus;
use crate::preprocess::MinMaxScaler;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("k = {k} exceeds the {n_train} training samples")]
    TrainTooSmall { k: usize, n_train: usize },
    #[error("negative value in feature {feature} ({value}); count-based variants need non-negative features")]
    NegativeFeature { feature: usize, value: f64 },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("row has {got} features, model expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
}

/// Classifier family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    Knn,
    NaiveBayes,
    RandomForest,
    Mlp,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFamily::Knn => f.write_str("kNN"),
            ModelFamily::NaiveBayes => f.write_str("NB"),
            ModelFamily::RandomForest => f.write_str("RF"),
            ModelFamily::Mlp => f.write_str("ANN"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub variant: NbVariant,
}

/// Family-specific parameter record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum FamilyParams {
    Knn(KnnParams),
    NaiveBayes(NaiveBayesParams),
    RandomForest(RandomForestParams),
    Mlp(MlpParams),
}

impl FamilyParams {
    pub fn family(&self) -> ModelFamily {
        match self {
            FamilyParams::Knn(_) => ModelFamily::Knn,
            FamilyParams::NaiveBayes(_) => ModelFamily::NaiveBayes,
            FamilyParams::RandomForest(_) => ModelFamily::RandomForest,
            FamilyParams::Mlp(_) => ModelFamily::Mlp,
        }
    }

    /// Short human-readable form for report rows.
    pub fn label(&self) -> String {
        match self {
            FamilyParams::Knn(p) => format!("k={}", p.k),
            FamilyParams::NaiveBayes(p) => format!("{:?}", p.variant),
            FamilyParams::RandomForest(p) => format!("trees={}", p.n_trees),
            FamilyParams::Mlp(p) => format!(
                "layers=[{}]",
                p.hidden_layers.iter().map(ToString::to_string).collect::<Vec<_>>().join("x")
            ),
        }
    }
}

/// One grid-search configuration: parameters plus the seed that makes the
/// fit reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: FamilyParams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn family(&self) -> ModelFamily {
        self.params.family()
    }
}

/// Family-specific fitted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FittedState {
    Knn(KnnClassifier),
    NaiveBayes(NaiveBayesClassifier),
    RandomForest(RandomForest),
    Mlp(Mlp),
}

/// Evidence returned alongside a single prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PredictEvidence {
    Knn { neighbors: Vec<Neighbor> },
    NaiveBayes { contributions: Vec<FeatureLogLikelihood>, log_prior_closed: f64, log_prior_open: f64 },
    RandomForest { closed_votes: usize, open_votes: usize },
    Mlp { probability_closed: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub train_index: usize,
    pub distance: f64,
    pub label: ZoneStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLogLikelihood {
    pub feature_index: usize,
    pub log_likelihood_closed: f64,
    pub log_likelihood_open: f64,
}

/// A fully fitted, serializable model: spec, selected features, the scaler
/// fit on its training data and the family state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub scaler: MinMaxScaler,
    pub state: FittedState,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl TrainedModel {
    /// Fit the spec's family on already-selected raw (unscaled) rows.
    pub fn fit(
        spec: &ModelSpec,
        feature_names: Vec<String>,
        raw_rows: &[Vec<f64>],
        labels: &[ZoneStatus],
    ) -> Result<TrainedModel, ModelError> {
        if raw_rows.is_empty() {
            return Err(ModelError::EmptyTrainSet);
        }
        let scaler = MinMaxScaler::fit(raw_rows);
        let scaled = scaler.transform(raw_rows);
        let state = fit_state(spec, &scaled, labels)?;
        Ok(TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            spec: spec.clone(),
            feature_names,
            scaler,
            state,
        })
    }

    /// Predict one raw (unscaled) row already restricted to the model's
    /// feature set, in order.
    pub fn predict(&self, raw_row: &[f64]) -> Result<ZoneStatus, ModelError> {
        Ok(self.predict_with_evidence(raw_row)?.0)
    }

    pub fn predict_with_evidence(
        &self,
        raw_row: &[f64],
    ) -> Result<(ZoneStatus, PredictEvidence), ModelError> {
        if raw_row.len() != self.feature_names.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.feature_names.len(),
                got: raw_row.len(),
            });
        }
        let scaled = self.scaler.transform_row(raw_row);
        predict_state(&self.state, &scaled)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), String> {
        let file = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self).map_err(|e| e.to_string())
    }

    pub fn load(path: &std::path::Path) -> Result<TrainedModel, String> {
        let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| e.to_string())
    }
}

/// Fit the family state on scaled rows.
pub fn fit_state(
    spec: &ModelSpec,
    scaled_rows: &[Vec<f64>],
    labels: &[ZoneStatus],
) -> Result<FittedState, ModelError> {
    Ok(match &spec.params {
        FamilyParams::Knn(p) => FittedState::Knn(KnnClassifier::fit(scaled_rows, labels, p.k)?),
        FamilyParams::NaiveBayes(p) => {
            FittedState::NaiveBayes(NaiveBayesClassifier::fit(scaled_rows, labels, p.variant)?)
        }
        FamilyParams::RandomForest(p) => {
            FittedState::RandomForest(RandomForest::fit(scaled_rows, labels, p, spec.seed)?)
        }
        FamilyParams::Mlp(p) => FittedState::Mlp(Mlp::fit(scaled_rows, labels, p, spec.seed)?),
    })
}

/// Predict one scaled row with the family state.
pub fn predict_state(
    state: &FittedState,
    scaled_row: &[f64],
) -> Result<(ZoneStatus, PredictEvidence), ModelError> {
    match state {
        FittedState::Knn(m) => {
            let (label, neighbors) = m.predict_with_neighbors(scaled_row)?;
            Ok((label, PredictEvidence::Knn { neighbors }))
        }
        FittedState::NaiveBayes(m) => {
            let (label, contributions, priors) = m.predict_with_contributions(scaled_row)?;
            Ok((
                label,
                PredictEvidence::NaiveBayes {
                    contributions,
                    log_prior_closed: priors.0,
                    log_prior_open: priors.1,
                },
            ))
        }
        FittedState::RandomForest(m) => {
            let (label, closed_votes) = m.predict_with_votes(scaled_row)?;
            Ok((
                label,
                PredictEvidence::RandomForest {
                    closed_votes,
                    open_votes: m.n_trees() - closed_votes,
                },
            ))
        }
        FittedState::Mlp(m) => {
            let p = m.predict_proba(scaled_row)?;
            Ok((
                if p >= 0.5 { ZoneStatus::Closed } else { ZoneStatus::Open },
                PredictEvidence::Mlp { probability_closed: p },
            ))
        }
    }
}

/// Majority-of-two-counts with the Closed tie-break shared by the voting
/// families.
pub(crate) fn closed_majority(closed: usize, open: usize) -> ZoneStatus {
    if closed >= open {
        ZoneStatus::Closed
    } else {
        ZoneStatus::Open
    }
}
