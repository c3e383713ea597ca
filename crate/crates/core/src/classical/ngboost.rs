use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeSpec};
use crate::linalg::Matrix;
use crate::model::{Diagnostics, ModelError, PredictiveDistribution};

/// Natural-gradient boosting of a Normal(μ, log σ) predictive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgBoostSpec {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for NgBoostSpec {
    fn default() -> Self {
        Self { n_stages: 300, learning_rate: 0.03, max_depth: 3, min_samples_leaf: 5 }
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Negative log-likelihood of `y` under Normal(mu, exp(log_sigma)²).
pub fn normal_nll(y: f64, mu: f64, log_sigma: f64) -> f64 {
    let z = (y - mu) * (-log_sigma).exp();
    0.5 * LN_2PI + log_sigma + 0.5 * z * z
}

/// Ordinary gradient of [`normal_nll`] with respect to (μ, log σ).
pub fn normal_nll_grad(y: f64, mu: f64, log_sigma: f64) -> [f64; 2] {
    let inv_var = (-2.0 * log_sigma).exp();
    [(mu - y) * inv_var, 1.0 - (y - mu) * (y - mu) * inv_var]
}

/// Fisher information of the Normal in (μ, log σ): diag(1/σ², 2).
pub fn normal_fisher(log_sigma: f64) -> [f64; 2] {
    [(-2.0 * log_sigma).exp(), 2.0]
}

/// Fisher-preconditioned gradient: [(μ − y), ½(1 − (y − μ)²/σ²)].
pub fn normal_natural_grad(y: f64, mu: f64, log_sigma: f64) -> [f64; 2] {
    let g = normal_nll_grad(y, mu, log_sigma);
    let f = normal_fisher(log_sigma);
    [g[0] / f[0], g[1] / f[1]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgStage {
    pub mu_tree: RegressionTree,
    pub log_sigma_tree: RegressionTree,
    /// learning_rate × line-search scale.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgBoostModel {
    pub init_mu: f64,
    pub init_log_sigma: f64,
    pub stages: Vec<NgStage>,
    /// Mean training NLL after initialization and each stage.
    pub nll_trace: Vec<f64>,
}

fn mean_nll(y: &[f64], mu: &[f64], ls: &[f64]) -> f64 {
    y.iter().zip(mu).zip(ls).map(|((&y, &m), &s)| normal_nll(y, m, s)).sum::<f64>() / y.len() as f64
}

fn shifted(base: &[f64], step: &[f64], scale: f64) -> Vec<f64> {
    base.iter().zip(step).map(|(b, s)| b + scale * s).collect()
}

impl NgBoostSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::InvalidSpec(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        Ok(())
    }
}

impl NgBoostModel {
    pub fn fit(x: &Matrix, y: &[f64], spec: &NgBoostSpec, diag: &mut Diagnostics) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        spec.validate()?;
        let n = y.len() as f64;
        let init_mu = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - init_mu).powi(2)).sum::<f64>() / n;
        if var <= 0.0 {
            return Err(ModelError::DegenerateVariance);
        }
        let init_log_sigma = 0.5 * var.ln();

        let tree_spec = TreeSpec { max_depth: spec.max_depth, min_samples_leaf: spec.min_samples_leaf };
        let mut mu = vec![init_mu; y.len()];
        let mut ls = vec![init_log_sigma; y.len()];
        let mut current = mean_nll(y, &mu, &ls);
        let mut nll_trace = vec![current];
        let mut stages = Vec::with_capacity(spec.n_stages);
        let mut stalled = 0usize;

        for _ in 0..spec.n_stages {
            let (mut g_mu, mut g_ls) = (Vec::with_capacity(y.len()), Vec::with_capacity(y.len()));
            for i in 0..y.len() {
                let g = normal_natural_grad(y[i], mu[i], ls[i]);
                g_mu.push(-g[0]);
                g_ls.push(-g[1]);
            }
            let mu_tree = RegressionTree::fit(x, &g_mu, tree_spec)?;
            let log_sigma_tree = RegressionTree::fit(x, &g_ls, tree_spec)?;
            let d_mu = mu_tree.predict(x);
            let d_ls = log_sigma_tree.predict(x);

            // Halve the scale until the full step improves, then make sure
            // the shrunken step does too.
            let mut rho = 1.0;
            let mut accepted = 0.0;
            for _ in 0..60 {
                let full = mean_nll(y, &shifted(&mu, &d_mu, rho), &shifted(&ls, &d_ls, rho));
                if full.is_finite() && full < current {
                    let s = spec.learning_rate * rho;
                    let next = mean_nll(y, &shifted(&mu, &d_mu, s), &shifted(&ls, &d_ls, s));
                    if next.is_finite() && next <= current {
                        accepted = s;
                        break;
                    }
                }
                rho *= 0.5;
            }
            if accepted == 0.0 {
                stalled += 1;
            }
            mu = shifted(&mu, &d_mu, accepted);
            ls = shifted(&ls, &d_ls, accepted);
            current = mean_nll(y, &mu, &ls);
            nll_trace.push(current);
            stages.push(NgStage { mu_tree, log_sigma_tree, scale: accepted });
        }
        diag.set("nll_initial", nll_trace[0]);
        diag.set("nll_final", current);
        if stalled > 0 {
            diag.note(format!("ngboost: {stalled} stages made no progress in the line search"));
        }
        Ok(Self { init_mu, init_log_sigma, stages, nll_trace })
    }

    /// (μ, log σ) for one row.
    pub fn params_row(&self, row: &[f64]) -> (f64, f64) {
        let mut mu = self.init_mu;
        let mut ls = self.init_log_sigma;
        for s in &self.stages {
            if s.scale != 0.0 {
                mu += s.scale * s.mu_tree.predict_row(row);
                ls += s.scale * s.log_sigma_tree.predict_row(row);
            }
        }
        (mu, ls)
    }

    pub fn predict(&self, x: &Matrix, z: f64) -> PredictiveDistribution {
        let (mean, std) = x
            .iter_rows()
            .map(|row| {
                let (m, ls) = self.params_row(row);
                (m, ls.exp())
            })
            .unzip();
        PredictiveDistribution::gaussian(mean, std, z, false)
    }
}
