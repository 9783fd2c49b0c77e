//! Generator-relative performance bounds.
//!
//! The generator's own closure rule, evaluated on the noiseless latent
//! state, is the best any observer could do; published labels differ from
//! it only through the one-sided miss noise. The bounds below are computed
//! on the complete rows of each zone's design matrix, the same population
//! the pipeline trains and scores on.

use super::process::{generate, GeneratedData};
use super::GeneratorConfig;
use crate::domain::ZoneId;
use crate::preprocess::assemble_zone_matrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneBound {
    pub zone: ZoneId,
    /// Fraction of rule-mandated closures that stayed Closed in the
    /// published history: 1 - label_noise in expectation.
    pub sensitivity_bound: f64,
    /// Fraction of complete rows whose published label matches the rule.
    pub accuracy_bound: f64,
    pub n_complete_rows: usize,
    pub n_rule_closures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesReference {
    pub seed: u64,
    pub per_zone: Vec<ZoneBound>,
}

/// Regenerate with the same config and score the rule against the
/// published labels on each zone's complete rows.
pub fn bayes_reference(config: &GeneratorConfig) -> Result<BayesReference, String> {
    let data = generate(config)?;
    Ok(bounds_from(config, &data))
}

/// Same computation when the generated data is already in hand.
pub fn bounds_from(config: &GeneratorConfig, data: &GeneratedData) -> BayesReference {
    let mut per_zone = Vec::new();
    for zone in &config.zones {
        let matrix = assemble_zone_matrix(&data.dataset, zone).expect("generated data assembles");
        let rule = &data.latent.rule_closed[zone];
        let published = &data.latent.published_closed[zone];

        let mut rule_closures = 0usize;
        let mut kept_closures = 0usize;
        let mut agree = 0usize;
        let mut complete = 0usize;
        for (i, row) in matrix.rows.iter().enumerate() {
            if row.is_null() {
                continue;
            }
            complete += 1;
            debug_assert_eq!(row.label.is_closed(), published[i]);
            if rule[i] {
                rule_closures += 1;
                if published[i] {
                    kept_closures += 1;
                }
            }
            if rule[i] == published[i] {
                agree += 1;
            }
        }
        per_zone.push(ZoneBound {
            zone: zone.clone(),
            sensitivity_bound: if rule_closures > 0 {
                kept_closures as f64 / rule_closures as f64
            } else {
                1.0
            },
            accuracy_bound: if complete > 0 { agree as f64 / complete as f64 } else { 1.0 },
            n_complete_rows: complete,
            n_rule_closures: rule_closures,
        });
    }
    BayesReference { seed: config.seed, per_zone }
}
