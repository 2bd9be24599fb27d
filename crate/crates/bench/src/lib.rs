//! Shared fixtures for the benchmarks.

use dcrv::rational::ratio;
use dcrv::ModelParams;

/// Three skewed categories with moderate dependence.
pub fn skewed_model() -> ModelParams {
    ModelParams::new(&[0.2, 0.3, 0.5], 0.4).expect("valid model")
}

/// Uniform categories with the dependence used in the worked examples.
pub fn uniform_model(k: usize) -> ModelParams {
    let probs = vec![ratio(1, k as i64); k];
    ModelParams::from_rationals(probs, ratio(1, 2)).expect("valid model")
}
