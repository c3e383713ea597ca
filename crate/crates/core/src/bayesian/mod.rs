//! Bayesian neural networks: mean-field variational inference and
//! Hamiltonian Monte Carlo over the weights.
//!
//! Both families use a Gaussian likelihood with fixed noise `sigma_lik` on
//! log10-life targets and an isotropic Gaussian weight prior.

pub mod hmc;
pub mod mcmc;
pub mod vi;

use crate::linalg::Matrix;
use crate::neural::{backward, forward_batch, MlpShape};
use crate::piml::{bound_penalty, PhysicsLossSpec};

pub use hmc::{hmc_sample, leapfrog, Chain, HmcSettings, LogDensity, Trajectory};
pub use mcmc::{mcmc_predict, McmcModel, McmcSpec};
pub use vi::{gaussian_kl, neg_elbo, softplus, ViModel, ViSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("log density is not finite at the initial point")]
    NonFiniteInit,
    #[error("every one of the {draws} post-warmup proposals was rejected")]
    AllRejected { draws: usize },
    #[error("invalid sampler settings: {0}")]
    InvalidSettings(String),
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-likelihood of the targets under `N(f(x), sigma_lik²)` and its
/// gradient with respect to the network parameters. With a physics spec
/// the bound penalty, divided by `2·sigma_lik²`, is subtracted.
pub fn log_likelihood(
    shape: &MlpShape,
    params: &[f64],
    x: &Matrix,
    y: &[f64],
    sigma_lik: f64,
    physics: Option<&PhysicsLossSpec>,
) -> (f64, Vec<f64>) {
    let cache = forward_batch(shape, params, x, None);
    let var = sigma_lik * sigma_lik;
    let mut value = -0.5 * y.len() as f64 * (LN_2PI + var.ln());
    // d_out is the derivative of the negative log-likelihood.
    let d_out: Vec<f64> = y
        .iter()
        .zip(cache.outputs())
        .map(|(&t, &f)| {
            let r = t - f;
            value -= 0.5 * r * r / var;
            let mut g = -r / var;
            if let Some(p) = physics {
                let (pen, dpen) = bound_penalty(f, p);
                value -= pen / (2.0 * var);
                g += dpen / (2.0 * var);
            }
            g
        })
        .collect();
    let mut grad = backward(shape, params, &cache, &d_out, None);
    grad.iter_mut().for_each(|g| *g = -*g);
    (value, grad)
}

/// Isotropic Gaussian log prior and its gradient.
pub fn log_prior(params: &[f64], prior_sd: f64) -> (f64, Vec<f64>) {
    let var = prior_sd * prior_sd;
    let mut value = -0.5 * params.len() as f64 * (LN_2PI + var.ln());
    let grad = params
        .iter()
        .map(|&w| {
            value -= 0.5 * w * w / var;
            -w / var
        })
        .collect();
    (value, grad)
}

/// Unnormalized log posterior (normalizing constants of likelihood and
/// prior included) and its gradient.
pub fn log_posterior(
    shape: &MlpShape,
    params: &[f64],
    x: &Matrix,
    y: &[f64],
    prior_sd: f64,
    sigma_lik: f64,
    physics: Option<&PhysicsLossSpec>,
) -> (f64, Vec<f64>) {
    let (ll, mut g) = log_likelihood(shape, params, x, y, sigma_lik, physics);
    let (lp, gp) = log_prior(params, prior_sd);
    for (a, b) in g.iter_mut().zip(gp) {
        *a += b;
    }
    (ll + lp, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn zero_network_closed_form() {
        let shape = MlpShape::new(2, &[3], 0.0).unwrap();
        let params = vec![0.0; shape.n_params()];
        let x = Matrix::from_rows(&[vec![0.4, -1.2]]);
        let (lp, _) = log_posterior(&shape, &params, &x, &[0.0], 1.0, 0.1, None);
        let normal = |v: f64, sd: f64| -0.5 * (2.0 * std::f64::consts::PI * sd * sd).ln() - 0.5 * v * v / (sd * sd);
        let expected = normal(0.0, 0.1) + shape.n_params() as f64 * normal(0.0, 1.0);
        assert!((lp - expected).abs() <= 1e-12 * expected.abs());
    }

    fn fd_check(physics: Option<&PhysicsLossSpec>) {
        let mut r = rng::from_seed(31);
        let shape = MlpShape::new(2, &[10, 10, 10, 10, 10], 0.0).unwrap();
        let params: Vec<f64> = shape.init_params(&mut r).iter().map(|v| v * 2.0).collect();
        let rows: Vec<Vec<f64>> = (0..12).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect();
        let y: Vec<f64> = (0..12).map(|_| r.random::<f64>() * 10.0 - 2.0).collect();
        let x = Matrix::from_rows(&rows);
        let (_, g) = log_posterior(&shape, &params, &x, &y, 1.0, 0.3, physics);
        let h = 1e-5;
        let mut p = params.clone();
        for k in 0..p.len() {
            let orig = p[k];
            p[k] = orig + h;
            let up = log_posterior(&shape, &p, &x, &y, 1.0, 0.3, physics).0;
            p[k] = orig - h;
            let down = log_posterior(&shape, &p, &x, &y, 1.0, 0.3, physics).0;
            p[k] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!((g[k] - fd).abs() <= 1e-4 * fd.abs().max(g[k].abs()) + 1e-6, "param {k}: {} vs {fd}", g[k]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        fd_check(None);
        fd_check(Some(&PhysicsLossSpec { lower_bound: 1.0, upper_bound: 3.0, ..Default::default() }));
    }

    #[test]
    fn perfect_fit_is_a_local_maximum_of_the_likelihood() {
        let mut r = rng::from_seed(32);
        let shape = MlpShape::new(2, &[6], 0.0).unwrap();
        let params = shape.init_params(&mut r);
        let x = Matrix::from_rows(&(0..10).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect::<Vec<_>>());
        let y = crate::neural::Mlp::new(shape.clone(), params.clone()).predict(&x);
        let f = |p: &[f64]| log_likelihood(&shape, p, &x, &y, 0.1, None).0;
        let h = 1e-3;
        for _ in 0..20 {
            let dir: Vec<f64> = (0..params.len()).map(|_| r.random::<f64>() - 0.5).collect();
            let plus: Vec<f64> = params.iter().zip(&dir).map(|(p, d)| p + h * d).collect();
            let minus: Vec<f64> = params.iter().zip(&dir).map(|(p, d)| p - h * d).collect();
            assert!(f(&plus) - 2.0 * f(&params) + f(&minus) <= 0.0);
        }
    }
}
