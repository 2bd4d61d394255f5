//! Shared fixtures for the benchmarks.

use juicespec_core::featurize::assemble_features;
use juicespec_core::synth::generate_synthetic_dataset;
use juicespec_core::{Dataset, FeatureMatrix, FeatureSpec, Standardizer, SynthConfig, Target, Targets};

pub fn dataset(seed: u64) -> Dataset {
    generate_synthetic_dataset(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })
    .expect("default config is feasible")
}

/// Standardized features and targets of the default synthetic dataset.
pub fn problem(target: Target, seed: u64) -> (FeatureMatrix, Targets) {
    let (x, y) = assemble_features(&dataset(seed), &FeatureSpec::for_target(target)).expect("complete dataset");
    let x = Standardizer::fit(&x).and_then(|s| s.apply(&x)).expect("enough rows");
    (x, y)
}
