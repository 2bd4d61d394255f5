use juicespec_core::importance::{importance_curves, top_k_wavelengths, Method};
use juicespec_core::synth::generate_synthetic_dataset;
use juicespec_core::*;

#[test]
fn tannin_band_ranks_first_for_both_methods() {
    for seed in 100..105 {
        let d = generate_synthetic_dataset(&SynthConfig {
            seed,
            ..SynthConfig::default()
        })
        .unwrap();
        let curves = importance_curves(
            &d,
            &FeatureSpec::for_target(Target::Bitterness),
            &ModelSpec::new(ModelKind::Svm),
            seed,
        )
        .unwrap();
        assert_eq!(
            curves.iter().map(|c| c.method).collect::<Vec<_>>(),
            vec![Method::Rf, Method::Svm]
        );
        for c in &curves {
            let top = top_k_wavelengths(c, 5).unwrap();
            assert_eq!(top[0].wavelength, Some(204), "seed {seed} {}", c.method);
            assert!(c.normalized.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn shifted_band_moves_the_peak() {
    let d = generate_synthetic_dataset(&SynthConfig {
        informative_band_nm: 300.0,
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap();
    let curves = importance_curves(
        &d,
        &FeatureSpec::for_target(Target::Bitterness),
        &ModelSpec::new(ModelKind::Svm),
        5,
    )
    .unwrap();
    for c in &curves {
        let top = top_k_wavelengths(c, 1).unwrap()[0].wavelength.unwrap();
        assert!((296..=304).contains(&top), "{} peaked at {top}", c.method);
    }
}

#[test]
fn chemistry_columns_are_scored_but_listed_after_ties() {
    let d = generate_synthetic_dataset(&SynthConfig::default()).unwrap();
    let curves = importance_curves(
        &d,
        &FeatureSpec::for_target(Target::Region),
        &ModelSpec::new(ModelKind::Svm),
        1,
    )
    .unwrap();
    for c in &curves {
        assert!(c.column_names.iter().any(|n| n == "ph"));
        let ph = c.column_names.iter().position(|n| n == "ph").unwrap();
        assert_eq!(c.wavelengths[ph], None);
    }
}
