//! Mean-field Gaussian variational inference (Bayes by backprop).

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::log_likelihood;
use crate::linalg::Matrix;
use crate::model::{Diagnostics, LossSpec, ModelError, PredictiveDistribution};
use crate::neural::{Mlp, MlpShape, NesterovSpec, OptimizerSpec};
use crate::piml::PhysicsLossSpec;
use crate::rng;

const STREAM_INIT: u64 = 11;
const STREAM_TRAIN: u64 = 12;
const STREAM_PREDICT: u64 = 13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViSpec {
    pub hidden: Vec<usize>,
    pub prior_sd: f64,
    pub optimizer: OptimizerSpec,
    pub elbo_mc_samples: usize,
    pub epochs: usize,
    pub predict_samples: usize,
    pub sigma_lik: f64,
    /// Initial posterior standard deviation of every weight.
    pub init_sigma: f64,
    /// Add `sigma_lik²` to the predictive variance.
    pub predictive_noise: bool,
}

impl Default for ViSpec {
    fn default() -> Self {
        Self {
            hidden: vec![100, 100],
            prior_sd: 0.06,
            optimizer: OptimizerSpec::SgdNesterov(NesterovSpec { learning_rate: 0.001, momentum: 0.9 }),
            elbo_mc_samples: 1,
            epochs: 5000,
            predict_samples: 1000,
            sigma_lik: 0.1,
            init_sigma: 0.01,
            predictive_noise: false,
        }
    }
}

impl ViSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidSpec(m));
        if self.hidden.is_empty() {
            return bad("at least one hidden layer is required".into());
        }
        if !(self.prior_sd > 0.0 && self.sigma_lik > 0.0 && self.init_sigma > 0.0) {
            return bad("prior_sd, sigma_lik and init_sigma must be positive".into());
        }
        if self.elbo_mc_samples == 0 {
            return bad("elbo_mc_samples must be >= 1".into());
        }
        if self.predict_samples == 0 {
            return Err(ModelError::NoSamples);
        }
        self.optimizer.validate()
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// `KL(N(mu, sigma²) ‖ N(0, prior_sd²))`.
pub fn gaussian_kl(mu: f64, sigma: f64, prior_sd: f64) -> f64 {
    (prior_sd / sigma).ln() + (sigma * sigma + mu * mu) / (2.0 * prior_sd * prior_sd) - 0.5
}

/// Negative ELBO divided by the number of rows, for the weights
/// `w = mu + softplus(rho)·eps` with one `eps` vector per Monte Carlo draw.
/// Returns the value and the gradients with respect to `mu` and `rho`.
pub fn neg_elbo(
    shape: &MlpShape,
    mu: &[f64],
    rho: &[f64],
    eps: &[Vec<f64>],
    x: &Matrix,
    y: &[f64],
    prior_sd: f64,
    sigma_lik: f64,
    physics: Option<&PhysicsLossSpec>,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n = y.len() as f64;
    let s = eps.len() as f64;
    let sigma: Vec<f64> = rho.iter().map(|&r| softplus(r)).collect();
    let mut value = 0.0;
    let mut g_mu = vec![0.0; mu.len()];
    let mut g_rho = vec![0.0; mu.len()];
    for e in eps {
        let w: Vec<f64> = mu.iter().zip(&sigma).zip(e).map(|((m, s), e)| m + s * e).collect();
        let (ll, g) = log_likelihood(shape, &w, x, y, sigma_lik, physics);
        value -= ll / s;
        for k in 0..mu.len() {
            g_mu[k] -= g[k] / s;
            g_rho[k] -= g[k] * e[k] / s;
        }
    }
    let var_p = prior_sd * prior_sd;
    for k in 0..mu.len() {
        value += gaussian_kl(mu[k], sigma[k], prior_sd);
        g_mu[k] += mu[k] / var_p;
        g_rho[k] += -1.0 / sigma[k] + sigma[k] / var_p;
        g_rho[k] *= sigmoid(rho[k]);
    }
    g_mu.iter_mut().chain(g_rho.iter_mut()).for_each(|g| *g /= n);
    (value / n, g_mu, g_rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViModel {
    pub shape: MlpShape,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    pub predict_samples: usize,
    pub sigma_lik: f64,
    pub predictive_noise: bool,
    pub seed: u64,
    /// Per-epoch ELBO per row (the negative of the minimized objective).
    pub elbo_trace: Vec<f64>,
}

impl ViModel {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        spec: &ViSpec,
        loss: &LossSpec,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Self, ModelError> {
        spec.validate()?;
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let shape = MlpShape::new(x.cols(), &spec.hidden, 0.0)?;
        let p = shape.n_params();
        let mu0 = Mlp::init(shape.clone(), &mut rng::stream(seed, STREAM_INIT)).params;
        let mut params = mu0;
        params.extend(std::iter::repeat(softplus_inverse(spec.init_sigma)).take(p));

        let mut opt = spec.optimizer.state(2 * p);
        let mut r = rng::stream(seed, STREAM_TRAIN);
        let mut elbo_trace = Vec::with_capacity(spec.epochs);
        for epoch in 0..spec.epochs {
            let eps: Vec<Vec<f64>> = (0..spec.elbo_mc_samples)
                .map(|_| (0..p).map(|_| StandardNormal.sample(&mut r)).collect())
                .collect();
            let (mu, rho) = params.split_at(p);
            let (value, g_mu, g_rho) = neg_elbo(&shape, mu, rho, &eps, x, y, spec.prior_sd, spec.sigma_lik, loss.physics());
            if !value.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch });
            }
            elbo_trace.push(-value);
            let grad: Vec<f64> = g_mu.into_iter().chain(g_rho).collect();
            opt.step(&mut params, &grad);
        }
        if let Some(e) = elbo_trace.last() {
            diag.set("final_elbo_per_row", *e);
        }
        let rho = params.split_off(p);
        Ok(Self {
            shape,
            mu: params,
            rho,
            predict_samples: spec.predict_samples,
            sigma_lik: spec.sigma_lik,
            predictive_noise: spec.predictive_noise,
            seed,
            elbo_trace,
        })
    }

    /// One forward pass per weight draw from q; draw `s` uses its own
    /// stream.
    pub fn predict(&self, x: &Matrix, z: f64) -> Result<PredictiveDistribution, ModelError> {
        if self.predict_samples == 0 {
            return Err(ModelError::NoSamples);
        }
        let base = rng::derive_seed(self.seed, STREAM_PREDICT);
        let sigma: Vec<f64> = self.rho.iter().map(|&r| softplus(r)).collect();
        let samples: Vec<Vec<f64>> = (0..self.predict_samples)
            .into_par_iter()
            .map(|s| {
                let mut r = rng::stream(base, s as u64);
                let w = self
                    .mu
                    .iter()
                    .zip(&sigma)
                    .map(|(m, sd)| {
                        let e: f64 = StandardNormal.sample(&mut r);
                        m + sd * e
                    })
                    .collect();
                Mlp::new(self.shape.clone(), w).predict(x)
            })
            .collect();
        let extra = if self.predictive_noise { self.sigma_lik * self.sigma_lik } else { 0.0 };
        Ok(PredictiveDistribution::from_samples(&samples, extra, z))
    }
}
