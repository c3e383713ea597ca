#![allow(dead_code)]

use fatigue_uq::bayesian::{McmcSpec, Trajectory, ViSpec};
use fatigue_uq::classical::{GprSpec, NgBoostSpec, QrSpec};
use fatigue_uq::dataset::{scaler_apply, scaler_fit, synth_generate, target_log_transform, SynthSpec};
use fatigue_uq::neural::{EnsembleSpec, McDropoutSpec, NnSpec};
use fatigue_uq::{Dataset, ModelFamily, ModelSpec};

/// Every family with budgets small enough for a unit-test run.
pub fn small_models() -> Vec<ModelSpec> {
    let families = vec![
        ModelFamily::Qr(QrSpec { n_stages: 40, ..Default::default() }),
        ModelFamily::NgBoost(NgBoostSpec { n_stages: 40, ..Default::default() }),
        ModelFamily::Gpr(GprSpec::default()),
        ModelFamily::Nn(NnSpec { hidden: vec![16, 8], epochs: 150, ..Default::default() }),
        ModelFamily::DeepEnsemble(EnsembleSpec { n_members: 3, epochs: 150, ..Default::default() }),
        ModelFamily::McDropout(McDropoutSpec { n_samples: 50, epochs: 150, ..Default::default() }),
        ModelFamily::BnnVi(ViSpec { hidden: vec![16], epochs: 150, predict_samples: 50, ..Default::default() }),
        ModelFamily::BnnMcmc(McmcSpec {
            hidden: vec![6],
            warmup: 60,
            draws: 30,
            trajectory: Trajectory::Fixed { steps: 8 },
            ..Default::default()
        }),
    ];
    families.into_iter().map(|f| ModelSpec::new(f).with_seed(3)).collect()
}

/// Scaled, log-target synthetic split ready for `fit`.
pub fn prepared(n: usize, seed: u64) -> (Dataset, Dataset) {
    let data = synth_generate(&SynthSpec { n, n_nuisance: 2, seed, ..Default::default() }).unwrap();
    let cut = n * 4 / 5;
    let train = data.select_rows(&(0..cut).collect::<Vec<_>>());
    let test = data.select_rows(&(cut..n).collect::<Vec<_>>());
    let s = scaler_fit(&train).unwrap();
    (
        target_log_transform(&scaler_apply(&s, &train).unwrap()).unwrap(),
        target_log_transform(&scaler_apply(&s, &test).unwrap()).unwrap(),
    )
}
