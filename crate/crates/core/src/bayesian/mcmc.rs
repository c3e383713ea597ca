use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hmc::{hmc_sample, HmcSettings, LogDensity, Trajectory};
use super::log_posterior;
use crate::linalg::Matrix;
use crate::model::{Diagnostics, LossSpec, ModelError, PredictiveDistribution};
use crate::neural::{Mlp, MlpShape};
use crate::piml::PhysicsLossSpec;
use crate::rng;

const STREAM_INIT: u64 = 21;
const STREAM_CHAIN: u64 = 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSpec {
    pub hidden: Vec<usize>,
    pub prior_sd: f64,
    pub warmup: usize,
    pub draws: usize,
    pub sigma_lik: f64,
    pub trajectory: Trajectory,
    pub target_accept: f64,
}

impl Default for McmcSpec {
    fn default() -> Self {
        Self {
            hidden: vec![10; 5],
            prior_sd: 1.0,
            warmup: 500,
            draws: 100,
            sigma_lik: 0.1,
            trajectory: Trajectory::Fixed { steps: 32 },
            target_accept: 0.8,
        }
    }
}

/// Network weight posterior as a sampler target.
pub struct WeightPosterior<'a> {
    pub shape: &'a MlpShape,
    pub x: &'a Matrix,
    pub y: &'a [f64],
    pub prior_sd: f64,
    pub sigma_lik: f64,
    pub physics: Option<&'a PhysicsLossSpec>,
}

impl LogDensity for WeightPosterior<'_> {
    fn dim(&self) -> usize {
        self.shape.n_params()
    }

    fn log_density_grad(&self, q: &[f64]) -> (f64, Vec<f64>) {
        log_posterior(self.shape, q, self.x, self.y, self.prior_sd, self.sigma_lik, self.physics)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcModel {
    pub shape: MlpShape,
    pub draws: Vec<Vec<f64>>,
    pub sigma_lik: f64,
}

impl McmcSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidSpec(m.into()));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layers must be non-empty with widths >= 1");
        }
        if !(self.prior_sd > 0.0 && self.sigma_lik > 0.0) {
            return bad("prior_sd and sigma_lik must be positive");
        }
        if self.draws == 0 {
            return bad("draws must be >= 1");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return bad("target_accept must be in (0, 1)");
        }
        match self.trajectory {
            Trajectory::Fixed { steps: 0 } => bad("trajectory steps must be >= 1"),
            Trajectory::UTurn { max_depth: 0 } => bad("trajectory max_depth must be >= 1"),
            _ => Ok(()),
        }
    }
}

impl McmcModel {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        spec: &McmcSpec,
        loss: &LossSpec,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        spec.validate()?;
        let shape = MlpShape::new(x.cols(), &spec.hidden, 0.0)?;
        let init = Mlp::init(shape.clone(), &mut rng::stream(seed, STREAM_INIT)).params;
        let target = WeightPosterior { shape: &shape, x, y, prior_sd: spec.prior_sd, sigma_lik: spec.sigma_lik, physics: loss.physics() };
        let settings = HmcSettings {
            warmup: spec.warmup,
            draws: spec.draws,
            trajectory: spec.trajectory,
            target_accept: spec.target_accept,
            ..Default::default()
        };
        let chain = hmc_sample(&target, &init, &settings, rng::derive_seed(seed, STREAM_CHAIN))?;
        diag.set("acceptance_rate", chain.acceptance_rate);
        diag.set("step_size", chain.step_size);
        diag.set("divergences", chain.divergences as f64);
        diag.set("warmup_divergences", chain.warmup_divergences as f64);
        diag.set("gradient_evaluations", chain.gradient_evaluations as f64);
        if chain.divergences > 0 {
            diag.note(format!("bnn_mcmc: {} divergent post-warmup transitions", chain.divergences));
        }
        Ok(Self { shape, draws: chain.draws, sigma_lik: spec.sigma_lik })
    }

    pub fn predict(&self, x: &Matrix, z: f64) -> Result<PredictiveDistribution, ModelError> {
        mcmc_predict(&self.shape, &self.draws, x, self.sigma_lik, z)
    }
}

/// Posterior predictive: mean over draws, std including the observation
/// noise.
pub fn mcmc_predict(
    shape: &MlpShape,
    draws: &[Vec<f64>],
    x: &Matrix,
    sigma_lik: f64,
    z: f64,
) -> Result<PredictiveDistribution, ModelError> {
    if draws.is_empty() {
        return Err(ModelError::EmptyChain);
    }
    let preds: Vec<Vec<f64>> = draws.par_iter().map(|w| Mlp::new(shape.clone(), w.clone()).predict(x)).collect();
    Ok(PredictiveDistribution::from_samples(&preds, sigma_lik * sigma_lik, z))
}
