//! Naive Bayes in four flavours: Gaussian, Multinomial, Complement and
//! Bernoulli.
//!
//! All variants score argmax of log-prior plus per-feature log-likelihood
//! terms. Count variants use Laplace smoothing (alpha = 1); the Gaussian
//! variance is floored at 1e-9; Bernoulli binarizes scaled features at 0.5.

use super::{closed_majority, FeatureLogLikelihood, ModelError};
use crate::domain::ZoneStatus;
use serde::{Deserialize, Serialize};

const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NbVariant {
    Gaussian,
    Multinomial,
    Complement,
    Bernoulli,
}

/// Per-class fitted statistics; layout depends on the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ClassState {
    /// Per-feature mean and floored variance.
    Gaussian { means: Vec<f64>, vars: Vec<f64> },
    /// Per-feature ln(theta) of the (smoothed) count model. For the
    /// Complement variant these are the complement-class ratios and enter
    /// the score negated.
    LogTheta(Vec<f64>),
    /// Per-feature ln(p) and ln(1-p) of the (smoothed) Bernoulli model.
    Bernoulli { log_p: Vec<f64>, log_q: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesClassifier {
    pub variant: NbVariant,
    n_closed: usize,
    n_open: usize,
    n_features: usize,
    /// Absent when the class had no training rows.
    closed: Option<ClassState>,
    open: Option<ClassState>,
}

impl NaiveBayesClassifier {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[ZoneStatus],
        variant: NbVariant,
    ) -> Result<Self, ModelError> {
        if x.is_empty() {
            return Err(ModelError::EmptyTrainSet);
        }
        if matches!(variant, NbVariant::Multinomial | NbVariant::Complement) {
            check_non_negative(x)?;
        }
        let d = x[0].len();
        let closed_rows: Vec<&Vec<f64>> =
            x.iter().zip(y).filter(|(_, l)| l.is_closed()).map(|(r, _)| r).collect();
        let open_rows: Vec<&Vec<f64>> =
            x.iter().zip(y).filter(|(_, l)| !l.is_closed()).map(|(r, _)| r).collect();

        let (closed, open) = match variant {
            NbVariant::Gaussian => (gaussian_state(&closed_rows, d), gaussian_state(&open_rows, d)),
            NbVariant::Multinomial => {
                (multinomial_state(&closed_rows, d), multinomial_state(&open_rows, d))
            }
            NbVariant::Complement => {
                // Each class is modelled by the counts of everything outside it.
                (multinomial_state(&open_rows, d), multinomial_state(&closed_rows, d))
            }
            NbVariant::Bernoulli => (bernoulli_state(&closed_rows, d), bernoulli_state(&open_rows, d)),
        };
        // Count-based smoothing is defined even for an empty class, but an
        // empty class stays unusable via its zero prior.
        Ok(NaiveBayesClassifier {
            variant,
            n_closed: closed_rows.len(),
            n_open: open_rows.len(),
            n_features: d,
            closed,
            open,
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<ZoneStatus, ModelError> {
        Ok(self.predict_with_contributions(row)?.0)
    }

    /// Prediction plus per-feature log-likelihood terms and log-priors.
    /// A class with no training rows scores negative infinity overall; its
    /// per-feature terms are reported as 0.
    pub fn predict_with_contributions(
        &self,
        row: &[f64],
    ) -> Result<(ZoneStatus, Vec<FeatureLogLikelihood>, (f64, f64)), ModelError> {
        if row.len() != self.n_features {
            return Err(ModelError::ArityMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        if matches!(self.variant, NbVariant::Multinomial | NbVariant::Complement) {
            check_row_non_negative(row)?;
        }

        let n_total = (self.n_closed + self.n_open) as f64;
        let lp_closed = ln_or_neg_inf(self.n_closed as f64 / n_total);
        let lp_open = ln_or_neg_inf(self.n_open as f64 / n_total);

        let terms_closed = self.per_feature_terms(self.closed.as_ref(), row);
        let terms_open = self.per_feature_terms(self.open.as_ref(), row);

        let score_closed = if self.n_closed == 0 {
            f64::NEG_INFINITY
        } else {
            lp_closed + terms_closed.iter().sum::<f64>()
        };
        let score_open = if self.n_open == 0 {
            f64::NEG_INFINITY
        } else {
            lp_open + terms_open.iter().sum::<f64>()
        };

        let label = if score_closed == score_open {
            closed_majority(1, 1)
        } else if score_closed > score_open {
            ZoneStatus::Closed
        } else {
            ZoneStatus::Open
        };

        let contributions = (0..self.n_features)
            .map(|j| FeatureLogLikelihood {
                feature_index: j,
                log_likelihood_closed: terms_closed[j],
                log_likelihood_open: terms_open[j],
            })
            .collect();
        Ok((label, contributions, (finite_log_prior(lp_closed), finite_log_prior(lp_open))))
    }

    fn per_feature_terms(&self, state: Option<&ClassState>, row: &[f64]) -> Vec<f64> {
        let Some(state) = state else {
            return vec![0.0; self.n_features];
        };
        match state {
            ClassState::Gaussian { means, vars } => row
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let var = vars[j];
                    -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                        - (v - means[j]) * (v - means[j]) / (2.0 * var)
                })
                .collect(),
            ClassState::LogTheta(log_theta) => {
                let sign = if self.variant == NbVariant::Complement { -1.0 } else { 1.0 };
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| sign * v * log_theta[j])
                    .collect()
            }
            ClassState::Bernoulli { log_p, log_q } => row
                .iter()
                .enumerate()
                .map(|(j, &v)| if v >= 0.5 { log_p[j] } else { log_q[j] })
                .collect(),
        }
    }
}

fn finite_log_prior(lp: f64) -> f64 {
    if lp.is_finite() {
        lp
    } else {
        // Serialized rationale cannot carry -inf; an impossible class is
        // reported with an extreme but finite log-prior.
        -1e308
    }
}

fn ln_or_neg_inf(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn check_non_negative(rows: &[Vec<f64>]) -> Result<(), ModelError> {
    for row in rows {
        check_row_non_negative(row)?;
    }
    Ok(())
}

fn check_row_non_negative(row: &[f64]) -> Result<(), ModelError> {
    for (j, &v) in row.iter().enumerate() {
        if v < 0.0 {
            return Err(ModelError::NegativeFeature { feature: j, value: v });
        }
    }
    Ok(())
}

fn gaussian_state(rows: &[&Vec<f64>], d: usize) -> Option<ClassState> {
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            means[j] += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            vars[j] += (v - means[j]) * (v - means[j]);
        }
    }
    for v in &mut vars {
        *v = (*v / n).max(VARIANCE_FLOOR);
    }
    Some(ClassState::Gaussian { means, vars })
}

fn multinomial_state(rows: &[&Vec<f64>], d: usize) -> Option<ClassState> {
    // Laplace smoothing keeps theta finite even for an empty class.
    let mut counts = vec![0.0; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            counts[j] += v;
        }
    }
    let total: f64 = counts.iter().sum();
    let log_theta = counts
        .iter()
        .map(|&c| ((c + 1.0) / (total + d as f64)).ln())
        .collect();
    Some(ClassState::LogTheta(log_theta))
}

fn bernoulli_state(rows: &[&Vec<f64>], d: usize) -> Option<ClassState> {
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let mut ones = vec![0.0; d];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            if v >= 0.5 {
                ones[j] += 1.0;
            }
        }
    }
    let log_p: Vec<f64> = ones.iter().map(|&c| ((c + 1.0) / (n + 2.0)).ln()).collect();
    let log_q: Vec<f64> =
        ones.iter().map(|&c| ((n - c + 1.0) / (n + 2.0)).ln()).collect();
    Some(ClassState::Bernoulli { log_p, log_q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ZoneStatus::{Closed, Open};
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_symmetric_tie_goes_closed() {
        // Class means +/-1 with equal spread and equal priors: at the origin
        // the posteriors tie exactly.
        let x = vec![vec![0.5], vec![1.5], vec![-0.5], vec![-1.5]];
        let y = vec![Closed, Closed, Open, Open];
        let m = NaiveBayesClassifier::fit(&x, &y, NbVariant::Gaussian).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), Closed);
        assert_eq!(m.predict(&[0.6]).unwrap(), Closed);
        assert_eq!(m.predict(&[-0.6]).unwrap(), Open);
    }

    #[test]
    fn gaussian_invariant_under_affine_rescaling() {
        let x = vec![
            vec![1.0, 10.0],
            vec![2.0, 14.0],
            vec![4.0, 11.0],
            vec![5.0, 15.0],
            vec![1.5, 13.0],
        ];
        let y = vec![Closed, Closed, Open, Open, Closed];
        let m1 = NaiveBayesClassifier::fit(&x, &y, NbVariant::Gaussian).unwrap();

        let rescale = |r: &[f64]| vec![100.0 * r[0] - 3.0, 0.01 * r[1] + 7.0];
        let x2: Vec<Vec<f64>> = x.iter().map(|r| rescale(r)).collect();
        let m2 = NaiveBayesClassifier::fit(&x2, &y, NbVariant::Gaussian).unwrap();

        for q in [[1.2, 12.0], [3.0, 10.5], [4.8, 14.5], [0.0, 16.0]] {
            assert_eq!(
                m1.predict(&q).unwrap(),
                m2.predict(&rescale(&q)).unwrap(),
                "query {q:?}"
            );
        }
    }

    #[test]
    fn bernoulli_hand_computed_posterior() {
        // Closed: feature always 1 (3 rows); Open: 1 of 3 rows has it.
        // p_closed = (3+1)/(3+2) = 4/5, p_open = (1+1)/(3+2) = 2/5,
        // equal priors, so the score gap on a query with the feature set
        // is ln(4/5) - ln(2/5) = ln 2.
        let x = vec![vec![1.0], vec![1.0], vec![1.0], vec![0.0], vec![0.0], vec![1.0]];
        let y = vec![Closed, Closed, Closed, Open, Open, Open];
        let m = NaiveBayesClassifier::fit(&x, &y, NbVariant::Bernoulli).unwrap();
        let (label, contributions, (lp_c, lp_o)) =
            m.predict_with_contributions(&[1.0]).unwrap();
        assert_eq!(label, Closed);
        assert_abs_diff_eq!(lp_c, lp_o, epsilon = 1e-15);
        let gap = contributions[0].log_likelihood_closed - contributions[0].log_likelihood_open;
        assert_abs_diff_eq!(gap, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn multinomial_hand_computed_scores() {
        // Closed counts [3,2] (total 5): theta_c = [4/7, 3/7];
        // Open counts [0,2] (total 2): theta_o = [1/4, 3/4].
        let x = vec![vec![2.0, 1.0], vec![1.0, 1.0], vec![0.0, 2.0]];
        let y = vec![Closed, Closed, Open];
        let m = NaiveBayesClassifier::fit(&x, &y, NbVariant::Multinomial).unwrap();
        let (label, contributions, (lp_c, lp_o)) =
            m.predict_with_contributions(&[1.0, 1.0]).unwrap();
        assert_eq!(label, Closed);
        assert_abs_diff_eq!(lp_c, (2.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(lp_o, (1.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            contributions[0].log_likelihood_closed,
            (4.0f64 / 7.0).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            contributions[1].log_likelihood_open,
            (3.0f64 / 4.0).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn complement_uses_out_of_class_counts() {
        // Complement of Closed is the Open counts and vice versa; scores are
        // log-prior minus x . ln(theta~).
        let x = vec![vec![2.0, 1.0], vec![1.0, 1.0], vec![0.0, 2.0]];
        let y = vec![Closed, Closed, Open];
        let m = NaiveBayesClassifier::fit(&x, &y, NbVariant::Complement).unwrap();
        let (label, contributions, _) = m.predict_with_contributions(&[1.0, 1.0]).unwrap();
        assert_eq!(label, Closed);
        // theta~_closed = Open-model theta = [1/4, 3/4], negated in scores.
        assert_abs_diff_eq!(
            contributions[0].log_likelihood_closed,
            -(1.0f64 / 4.0).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            contributions[1].log_likelihood_closed,
            -(3.0f64 / 4.0).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn count_variants_reject_negative_features() {
        let x = vec![vec![1.0], vec![-0.1]];
        let y = vec![Closed, Open];
        for variant in [NbVariant::Multinomial, NbVariant::Complement] {
            assert_eq!(
                NaiveBayesClassifier::fit(&x, &y, variant),
                Err(ModelError::NegativeFeature { feature: 0, value: -0.1 })
            );
        }
        // Gaussian and Bernoulli accept any reals.
        assert!(NaiveBayesClassifier::fit(&x, &y, NbVariant::Gaussian).is_ok());
        assert!(NaiveBayesClassifier::fit(&x, &y, NbVariant::Bernoulli).is_ok());

        let ok = NaiveBayesClassifier::fit(&[vec![1.0], vec![0.5]], &y, NbVariant::Multinomial)
            .unwrap();
        assert_eq!(
            ok.predict(&[-1.0]),
            Err(ModelError::NegativeFeature { feature: 0, value: -1.0 })
        );
    }

    #[test]
    fn single_class_training_set_predicts_that_class() {
        let x = vec![vec![0.2], vec![0.4]];
        let y = vec![Open, Open];
        for variant in
            [NbVariant::Gaussian, NbVariant::Multinomial, NbVariant::Complement, NbVariant::Bernoulli]
        {
            let m = NaiveBayesClassifier::fit(&x, &y, variant).unwrap();
            assert_eq!(m.predict(&[0.3]).unwrap(), Open, "{variant:?}");
        }
    }
}
