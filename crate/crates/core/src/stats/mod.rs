//! Significance-testing suite: normality tests, one-way ANOVA and the
//! Tukey-Kramer pairwise comparison with a quadrature-based
//! studentized-range distribution.

pub mod anderson;
pub mod anova;
pub mod dist;
pub mod shapiro;
pub mod tukey;

pub use anderson::anderson_darling;
pub use anova::one_way_anova;
pub use shapiro::shapiro_wilk;
pub use tukey::{studentized_range_cdf, studentized_range_critical, tukey_kramer, PairwiseResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default significance level for decisions.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// A named sample of observations, e.g. the ten per-fold sensitivities of
/// one algorithm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleGroup {
    pub name: String,
    pub values: Vec<f64>,
}

impl SampleGroup {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        SampleGroup {
            name: name.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Degrees of freedom attached to a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreesOfFreedom {
    Single(f64),
    Pair(f64, f64),
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: Option<DegreesOfFreedom>,
    pub alpha: f64,
    /// True when the null hypothesis is rejected at `alpha`.
    pub reject: bool,
}

impl TestResult {
    pub(crate) fn at_alpha(statistic: f64, p_value: f64, df: Option<DegreesOfFreedom>) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            df,
            alpha: DEFAULT_ALPHA,
            reject: p_value < DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample size {n} outside supported range {min}..={max}")]
    SampleSizeOutOfRange { n: usize, min: usize, max: usize },
    #[error("sample has zero variance")]
    DegenerateVariance,
    #[error("need at least {required} groups, got {got}")]
    TooFewGroups { required: usize, got: usize },
    #[error("group {name:?} needs at least {required} observations, got {got}")]
    GroupTooSmall {
        name: String,
        required: usize,
        got: usize,
    },
    #[error("non-finite value in group {name:?}")]
    NonFiniteValue { name: String },
}

pub(crate) fn check_finite(group: &SampleGroup) -> Result<(), StatsError> {
    if group.values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteValue {
            name: group.name.clone(),
        });
    }
    Ok(())
}
