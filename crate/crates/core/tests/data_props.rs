use fatigue_uq::dataset::{
    kfold_split, load_csv, scaler_apply, scaler_fit, synth_generate, write_csv, SynthSpec,
};
use fatigue_uq::physics::basquin_fit;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn scaled_training_features_lie_in_unit_interval(n in 2usize..80, nuisance in 0usize..4, seed in any::<u64>()) {
        let d = synth_generate(&SynthSpec { n, n_nuisance: nuisance, seed, ..Default::default() }).unwrap();
        let s = scaler_fit(&d).unwrap();
        let scaled = scaler_apply(&s, &d).unwrap();
        prop_assert!(scaled.features().data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn csv_round_trip_is_lossless(n in 1usize..60, nuisance in 0usize..3, seed in any::<u64>()) {
        let spec = SynthSpec { n, n_nuisance: nuisance, seed, ..Default::default() };
        let d = synth_generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&d, &path).unwrap();
        let back = load_csv(&path, &spec.schema()).unwrap();
        prop_assert_eq!(back.features(), d.features());
        prop_assert_eq!(back.target(), d.target());
    }

    #[test]
    // c above the largest stress keeps every life above the one-cycle floor.
    fn noiseless_synth_is_an_exact_power_law(n in 3usize..200, m in -0.3..-0.05f64, c in 1500.0..5000.0f64, seed in any::<u64>()) {
        let d = synth_generate(&SynthSpec { n, m, c, noise_sigma: 0.0, seed, ..Default::default() }).unwrap();
        let pts: Vec<(f64, f64)> = d.stress().unwrap().into_iter().zip(d.target().unwrap().iter().copied()).collect();
        let fit = basquin_fit(&pts).unwrap();
        prop_assert!((fit.r2_loglog - 1.0).abs() < 1e-12, "r2 {}", fit.r2_loglog);
        prop_assert!(((fit.m - m) / m).abs() < 1e-9);
    }

    #[test]
    fn fold_plans_are_stable_under_reseeding(n in 2usize..200, seed in any::<u64>()) {
        let k = 2 + (seed as usize % (n - 1).min(9));
        let a = kfold_split(n, k, seed).unwrap();
        let b = kfold_split(n, k, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let mut all: Vec<usize> = a.assignments.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn basquin_recovery_on_synthetic_sets() {
    let exact = synth_generate(&SynthSpec { n: 300, c: 2000.0, m: -0.1, noise_sigma: 0.0, seed: 11, ..Default::default() }).unwrap();
    let pts = |d: &fatigue_uq::Dataset| -> Vec<(f64, f64)> {
        d.stress().unwrap().into_iter().zip(d.target().unwrap().iter().copied()).collect()
    };
    let fit = basquin_fit(&pts(&exact)).unwrap();
    assert!(((fit.m + 0.1) / 0.1).abs() < 1e-9);
    assert!((fit.r2_loglog - 1.0).abs() < 1e-12);

    let noisy = synth_generate(&SynthSpec { n: 300, c: 2000.0, m: -0.1, noise_sigma: 0.05, seed: 11, ..Default::default() }).unwrap();
    let fit = basquin_fit(&pts(&noisy)).unwrap();
    assert!((fit.m + 0.1).abs() <= 0.02, "m = {}", fit.m);
}
