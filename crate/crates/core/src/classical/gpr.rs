use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::model::{Diagnostics, ModelError, PredictiveDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GprOptimize {
    /// Use the configured hyperparameters as given.
    None,
    /// Maximize the log marginal likelihood over the candidate grids.
    #[default]
    Grid,
}

/// Exact GP regression with an RBF kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GprSpec {
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub optimize: GprOptimize,
    pub jitter: f64,
    pub grid_length_scale: Vec<f64>,
    pub grid_signal_variance: Vec<f64>,
    pub grid_noise_variance: Vec<f64>,
}

impl Default for GprSpec {
    fn default() -> Self {
        Self {
            length_scale: 1.0,
            signal_variance: 1.0,
            noise_variance: 1e-2,
            optimize: GprOptimize::Grid,
            jitter: 1e-8,
            grid_length_scale: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0],
            grid_signal_variance: vec![0.1, 0.3, 1.0, 3.0],
            grid_noise_variance: vec![1e-4, 1e-3, 1e-2, 0.03, 0.1, 0.3],
        }
    }
}

impl GprSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        positive("length_scale", self.length_scale)?;
        positive("signal_variance", self.signal_variance)?;
        positive("noise_variance", self.noise_variance)?;
        if !(self.jitter >= 0.0) {
            return Err(ModelError::InvalidSpec(format!("jitter must be >= 0, got {}", self.jitter)));
        }
        if self.optimize == GprOptimize::Grid {
            for (name, grid) in [
                ("grid_length_scale", &self.grid_length_scale),
                ("grid_signal_variance", &self.grid_signal_variance),
                ("grid_noise_variance", &self.grid_noise_variance),
            ] {
                if grid.is_empty() {
                    return Err(ModelError::InvalidSpec(format!("{name} is empty")));
                }
                for &v in grid {
                    positive(name, v)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

pub fn rbf(a: &[f64], b: &[f64], h: &Hyper) -> f64 {
    h.signal_variance * (-linalg::sq_dist(a, b) / (2.0 * h.length_scale * h.length_scale)).exp()
}

pub fn kernel_matrix(x: &Matrix, h: &Hyper) -> Matrix {
    let n = x.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rbf(x.row(i), x.row(j), h);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

const MAX_JITTER: f64 = 1e-4;

/// Cholesky of `K + (noise + jitter)·I`, multiplying the jitter by ten on
/// failure until it exceeds 1e-4. Returns the factor and the jitter used.
fn factor(k: &Matrix, noise: f64, jitter: f64) -> Result<(Matrix, f64), ModelError> {
    let mut j = jitter;
    loop {
        let mut a = k.clone();
        for i in 0..a.rows() {
            a.set(i, i, a.get(i, i) + noise + j);
        }
        match linalg::cholesky(&a) {
            Ok(l) => return Ok((l, j)),
            Err(_) => {
                j = if j == 0.0 { 1e-10 } else { j * 10.0 };
                if j > MAX_JITTER {
                    return Err(ModelError::NotPositiveDefinite { jitter: j / 10.0 });
                }
            }
        }
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log marginal likelihood of centered targets given the Cholesky factor.
pub fn log_marginal_likelihood(l: &Matrix, yc: &[f64]) -> f64 {
    let alpha = linalg::cholesky_solve(l, yc);
    -0.5 * linalg::dot(yc, &alpha) - 0.5 * linalg::cholesky_log_det(l) - 0.5 * yc.len() as f64 * LN_2PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GprModel {
    pub hyper: Hyper,
    pub jitter: f64,
    pub y_mean: f64,
    pub log_marginal_likelihood: f64,
    x_train: Matrix,
    chol: Matrix,
    alpha: Vec<f64>,
}

impl GprModel {
    pub fn fit(x: &Matrix, y: &[f64], spec: &GprSpec, diag: &mut Diagnostics) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        spec.validate()?;
        let y_mean = y.iter().sum::<f64>() / y.len() as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

        let candidates: Vec<Hyper> = match spec.optimize {
            GprOptimize::None => vec![Hyper {
                length_scale: spec.length_scale,
                signal_variance: spec.signal_variance,
                noise_variance: spec.noise_variance,
            }],
            GprOptimize::Grid => {
                let mut c = Vec::new();
                for &length_scale in &spec.grid_length_scale {
                    for &signal_variance in &spec.grid_signal_variance {
                        for &noise_variance in &spec.grid_noise_variance {
                            c.push(Hyper { length_scale, signal_variance, noise_variance });
                        }
                    }
                }
                c
            }
        };

        let mut best: Option<(f64, Hyper, Matrix, f64)> = None;
        let mut last_err = None;
        for h in candidates {
            let k = kernel_matrix(x, &h);
            let (l, j) = match factor(&k, h.noise_variance, spec.jitter) {
                Ok(f) => f,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let lml = log_marginal_likelihood(&l, &yc);
            let better = match &best {
                None => true,
                Some((b, bh, _, _)) => lml > *b || (lml == *b && h.length_scale > bh.length_scale),
            };
            if better && lml.is_finite() {
                best = Some((lml, h, l, j));
            }
        }
        let (lml, hyper, chol, jitter) = match best {
            Some(b) => b,
            None => return Err(last_err.unwrap_or(ModelError::NotPositiveDefinite { jitter: MAX_JITTER })),
        };
        let alpha = linalg::cholesky_solve(&chol, &yc);
        diag.set("length_scale", hyper.length_scale);
        diag.set("signal_variance", hyper.signal_variance);
        diag.set("noise_variance", hyper.noise_variance);
        diag.set("log_marginal_likelihood", lml);
        if jitter > spec.jitter {
            diag.note(format!("gpr: jitter escalated to {jitter:e}"));
        }
        Ok(Self { hyper, jitter, y_mean, log_marginal_likelihood: lml, x_train: x.clone(), chol, alpha })
    }

    /// Posterior mean and latent-function variance at one input.
    pub fn posterior_row(&self, row: &[f64]) -> (f64, f64) {
        let ks: Vec<f64> = self.x_train.iter_rows().map(|xi| rbf(xi, row, &self.hyper)).collect();
        let mean = self.y_mean + linalg::dot(&ks, &self.alpha);
        let v = linalg::solve_lower(&self.chol, &ks);
        let var_f = (self.hyper.signal_variance - linalg::dot(&v, &v)).max(0.0);
        (mean, var_f)
    }

    /// Predictive std includes the observation noise.
    pub fn predict(&self, x: &Matrix, z: f64) -> PredictiveDistribution {
        let (mean, std) = x
            .iter_rows()
            .map(|row| {
                let (m, v) = self.posterior_row(row);
                (m, (v + self.hyper.noise_variance).sqrt())
            })
            .unzip();
        PredictiveDistribution::gaussian(mean, std, z, false)
    }
}
