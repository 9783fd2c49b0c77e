//! Golden-file check for the generator's reference bounds at the default
//! paper-scale configuration.

use habgate_core::synth::{bayes_reference, BayesReference, GeneratorConfig};
use std::path::PathBuf;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/bayes_reference_seed42.json")
}

/// Run once with `--ignored` to (re)record the golden file after a
/// deliberate generator change.
#[test]
#[ignore]
fn regenerate_golden_reference() {
    let reference = bayes_reference(&GeneratorConfig::paper_scale(42)).unwrap();
    std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
    std::fs::write(
        golden_path(),
        serde_json::to_string_pretty(&reference).unwrap(),
    )
    .unwrap();
}

#[test]
fn default_config_bounds_match_committed_golden() {
    let expected: BayesReference =
        serde_json::from_str(&std::fs::read_to_string(golden_path()).unwrap()).unwrap();
    let actual = bayes_reference(&GeneratorConfig::paper_scale(42)).unwrap();
    assert_eq!(actual, expected);
}
