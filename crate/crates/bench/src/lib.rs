//! Fixtures shared by the criterion benchmarks.

use xmodal_core::synth::{product_catalog, SynthConfig};
use xmodal_core::{
    build_features, inject_errors, AlignedDataset, CorruptionConfig, LabeledSet, Modality,
    ValuationInput,
};

/// Clean catalogue of `rows` rows clustered by colour.
pub fn catalog(rows: usize, seed: u64) -> AlignedDataset {
    product_catalog(&SynthConfig {
        rows,
        seed,
        ..Default::default()
    })
    .expect("valid synthetic config")
}

/// Catalogue with half of the `Color` cells corrupted.
pub fn corrupted_catalog(rows: usize, seed: u64) -> AlignedDataset {
    let clean = catalog(rows, seed);
    let cfg = CorruptionConfig::new(0.5, seed, vec!["Color".into()])
        .with_propagation(vec!["Title".into()]);
    inject_errors(&clean, &cfg).expect("injection succeeds").0
}

/// Dirty/clean valuation input over image features with `Color` as label.
pub fn valuation_input(dirty_rows: usize, clean_rows: usize) -> ValuationInput {
    let dirty = build_features(&corrupted_catalog(dirty_rows, 1), "Color", Modality::ImageOnly)
        .expect("features");
    let clean = build_features(&catalog(clean_rows, 2), "Color", Modality::ImageOnly)
        .expect("features");
    ValuationInput::new(LabeledSet::from(dirty), LabeledSet::from(clean)).expect("valid input")
}
