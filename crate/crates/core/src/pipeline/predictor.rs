//! Single-query prediction against a saved model, with the family-specific
//! evidence spelled out.

use crate::domain::ZoneStatus;
use crate::models::{PredictEvidence, TrainedModel};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("feature mismatch; missing columns: {missing:?}")]
    FeatureMismatch { missing: Vec<String> },
    #[error("model rejected the row: {0}")]
    Model(#[from] crate::models::ModelError),
}

/// Prediction plus rationale, serialized for the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub label: ZoneStatus,
    pub model_family: String,
    pub evidence: PredictEvidence,
    /// Stable feature order the model consumed.
    pub feature_names: Vec<String>,
}

/// Predict one named-feature row. Missing features are an error naming
/// them; unknown extra keys are ignored.
pub fn predict_row(
    model: &TrainedModel,
    row: &BTreeMap<String, f64>,
) -> Result<Prediction, PredictError> {
    let missing: Vec<String> = model
        .feature_names
        .iter()
        .filter(|name| !row.contains_key(*name))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(PredictError::FeatureMismatch { missing });
    }
    let ordered: Vec<f64> = model.feature_names.iter().map(|n| row[n]).collect();
    let (label, evidence) = model.predict_with_evidence(&ordered)?;
    Ok(Prediction {
        label,
        model_family: model.spec.family().to_string(),
        evidence,
        feature_names: model.feature_names.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ZoneStatus::{Closed, Open};
    use crate::models::{FamilyParams, KnnParams, ModelSpec};

    fn knn_model() -> TrainedModel {
        let spec = ModelSpec { params: FamilyParams::Knn(KnnParams { k: 1 }), seed: 0 };
        TrainedModel::fit(
            &spec,
            vec!["a".to_string(), "b".to_string()],
            &[vec![0.0, 2.0], vec![1.0, 4.0]],
            &[Open, Closed],
        )
        .unwrap()
    }

    #[test]
    fn row_equal_to_training_point_returns_its_label_at_distance_zero() {
        let model = knn_model();
        let row: BTreeMap<String, f64> = [("a".to_string(), 0.0), ("b".to_string(), 2.0)].into();
        let p = predict_row(&model, &row).unwrap();
        assert_eq!(p.label, Open);
        match p.evidence {
            PredictEvidence::Knn { ref neighbors } => {
                assert_eq!(neighbors.len(), 1);
                assert_eq!(neighbors[0].distance, 0.0);
                assert_eq!(neighbors[0].train_index, 0);
            }
            ref other => panic!("wrong evidence: {other:?}"),
        }
    }

    #[test]
    fn missing_columns_named_in_error() {
        let model = knn_model();
        let row: BTreeMap<String, f64> = [("a".to_string(), 0.0)].into();
        match predict_row(&model, &row) {
            Err(PredictError::FeatureMismatch { missing }) => {
                assert_eq!(missing, vec!["b".to_string()]);
            }
            other => panic!("expected FeatureMismatch, got {other:?}"),
        }
    }

    #[test]
    fn extra_keys_are_ignored() {
        let model = knn_model();
        let row: BTreeMap<String, f64> = [
            ("a".to_string(), 1.0),
            ("b".to_string(), 4.0),
            ("irrelevant".to_string(), 99.0),
        ]
        .into();
        assert_eq!(predict_row(&model, &row).unwrap().label, Closed);
    }

    #[test]
    fn model_round_trips_through_json() {
        let model = knn_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let loaded = TrainedModel::load(&path).unwrap();
        assert_eq!(loaded, model);
    }
}
