//! Confusion-matrix metrics with closures as the positive class.

use crate::domain::ZoneStatus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Binary confusion counts. Closed predictions/labels are positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("confusion matrix has no entries")]
    EmptyMatrix,
    #[error("no positive (closed) samples: sensitivity undefined")]
    NoPositives,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        ConfusionMatrix {
            true_pos: tp,
            false_pos: fp,
            false_neg: fn_,
            true_neg: tn,
        }
    }

    /// Tally one (label, prediction) pair.
    pub fn record(&mut self, label: ZoneStatus, prediction: ZoneStatus) {
        match (label, prediction) {
            (ZoneStatus::Closed, ZoneStatus::Closed) => self.true_pos += 1,
            (ZoneStatus::Open, ZoneStatus::Closed) => self.false_pos += 1,
            (ZoneStatus::Closed, ZoneStatus::Open) => self.false_neg += 1,
            (ZoneStatus::Open, ZoneStatus::Open) => self.true_neg += 1,
        }
    }

    pub fn from_pairs(pairs: &[(ZoneStatus, ZoneStatus)]) -> Self {
        let mut cm = ConfusionMatrix::default();
        for &(label, pred) in pairs {
            cm.record(label, pred);
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// (TP + TN) / N.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricError> {
    let n = cm.total();
    if n == 0 {
        return Err(MetricError::EmptyMatrix);
    }
    Ok((cm.true_pos + cm.true_neg) as f64 / n as f64)
}

/// TP / (TP + FN); undefined when the fold has no closures.
pub fn sensitivity(cm: &ConfusionMatrix) -> Result<f64, MetricError> {
    let denom = cm.true_pos + cm.false_neg;
    if denom == 0 {
        return Err(MetricError::NoPositives);
    }
    Ok(cm.true_pos as f64 / denom as f64)
}

/// Cohen's kappa: (Pr(a) - Pr(e)) / (1 - Pr(e)).
///
/// Pr(e) = [(TP+FN)(TP+FP) + (FN+TN)(FP+TN)] / N². When Pr(e) = 1 the
/// coefficient is defined as 1 for perfect agreement and 0 otherwise.
pub fn kappa(cm: &ConfusionMatrix) -> Result<f64, MetricError> {
    let n = cm.total();
    if n == 0 {
        return Err(MetricError::EmptyMatrix);
    }
    let n = n as f64;
    let pr_a = (cm.true_pos + cm.true_neg) as f64 / n;
    let label_pos = (cm.true_pos + cm.false_neg) as f64;
    let pred_pos = (cm.true_pos + cm.false_pos) as f64;
    let label_neg = (cm.false_neg + cm.true_neg) as f64;
    let pred_neg = (cm.false_pos + cm.true_neg) as f64;
    let pr_e = (label_pos * pred_pos + label_neg * pred_neg) / (n * n);
    if pr_e >= 1.0 {
        return Ok(if pr_a >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((pr_a - pr_e) / (1.0 - pr_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_computed_example() {
        // Pr(a) = 17/20, Pr(e) = (10*11 + 9*10)/400 = 0.5
        let cm = ConfusionMatrix::new(9, 2, 1, 8);
        assert_abs_diff_eq!(accuracy(&cm).unwrap(), 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(sensitivity(&cm).unwrap(), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(kappa(&cm).unwrap(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn perfect_and_worst_cases() {
        let all_right = ConfusionMatrix::new(5, 0, 0, 5);
        assert_eq!(accuracy(&all_right).unwrap(), 1.0);
        assert_eq!(sensitivity(&all_right).unwrap(), 1.0);
        assert_eq!(kappa(&all_right).unwrap(), 1.0);

        let all_wrong = ConfusionMatrix::new(0, 5, 5, 0);
        assert_eq!(accuracy(&all_wrong).unwrap(), 0.0);
        assert_eq!(sensitivity(&all_wrong).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_cases() {
        let empty = ConfusionMatrix::default();
        assert_eq!(accuracy(&empty), Err(MetricError::EmptyMatrix));
        assert_eq!(kappa(&empty), Err(MetricError::EmptyMatrix));

        let no_pos = ConfusionMatrix::new(0, 3, 0, 7);
        assert_eq!(sensitivity(&no_pos), Err(MetricError::NoPositives));

        // Pr(e) = 1: everything labelled and predicted positive.
        let all_pos = ConfusionMatrix::new(10, 0, 0, 0);
        assert_eq!(kappa(&all_pos).unwrap(), 1.0);
    }

    #[test]
    fn coin_flip_predictions_have_near_zero_kappa() {
        // Predictions independent of labels at scale push kappa to 0.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<(ZoneStatus, ZoneStatus)> = (0..10_000)
            .map(|_| {
                let label = if rng.gen_bool(0.5) { ZoneStatus::Closed } else { ZoneStatus::Open };
                let pred = if rng.gen_bool(0.5) { ZoneStatus::Closed } else { ZoneStatus::Open };
                (label, pred)
            })
            .collect();
        let cm = ConfusionMatrix::from_pairs(&pairs);
        assert!(kappa(&cm).unwrap().abs() < 0.05);
    }

    #[test]
    fn metrics_match_brute_force_recomputation() {
        // Independent oracle: recompute each metric from the raw pairs.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let n = rng.gen_range(1..200);
            let pairs: Vec<(ZoneStatus, ZoneStatus)> = (0..n)
                .map(|_| {
                    let l = if rng.gen_bool(0.4) { ZoneStatus::Closed } else { ZoneStatus::Open };
                    let p = if rng.gen_bool(0.4) { ZoneStatus::Closed } else { ZoneStatus::Open };
                    (l, p)
                })
                .collect();
            let cm = ConfusionMatrix::from_pairs(&pairs);

            let agree = pairs.iter().filter(|(l, p)| l == p).count() as f64;
            assert_abs_diff_eq!(accuracy(&cm).unwrap(), agree / n as f64, epsilon = 1e-12);

            let closed = pairs.iter().filter(|(l, _)| l.is_closed()).count();
            if closed > 0 {
                let caught = pairs.iter().filter(|(l, p)| l.is_closed() && p.is_closed()).count();
                assert_abs_diff_eq!(
                    sensitivity(&cm).unwrap(),
                    caught as f64 / closed as f64,
                    epsilon = 1e-12
                );
            }

            if let Ok(k) = kappa(&cm) {
                assert!((-1.0..=1.0).contains(&k), "kappa out of range: {k}");
            }
        }
    }
}
