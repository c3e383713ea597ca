use serde::{Deserialize, Serialize};

use crate::model::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamSpec {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamSpec {
    fn default() -> Self {
        Self { learning_rate: 0.01, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NesterovSpec {
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for NesterovSpec {
    fn default() -> Self {
        Self { learning_rate: 0.001, momentum: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    Adam(AdamSpec),
    SgdNesterov(NesterovSpec),
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec::Adam(AdamSpec::default())
    }
}

impl OptimizerSpec {
    pub fn learning_rate(&self) -> f64 {
        match self {
            OptimizerSpec::Adam(a) => a.learning_rate,
            OptimizerSpec::SgdNesterov(s) => s.learning_rate,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let lr = self.learning_rate();
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(ModelError::InvalidSpec(format!("learning_rate must be positive, got {lr}")));
        }
        Ok(())
    }

    pub fn state(&self, n_params: usize) -> Optimizer {
        match *self {
            OptimizerSpec::Adam(spec) => Optimizer::Adam { spec, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 },
            OptimizerSpec::SgdNesterov(spec) => Optimizer::SgdNesterov { spec, buf: vec![0.0; n_params] },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Adam { spec: AdamSpec, m: Vec<f64>, v: Vec<f64>, t: i32 },
    SgdNesterov { spec: NesterovSpec, buf: Vec<f64> },
}

impl Optimizer {
    /// One descent step on `params` along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        match self {
            Optimizer::Adam { spec, m, v, t } => {
                *t += 1;
                let c1 = 1.0 - spec.beta1.powi(*t);
                let c2 = 1.0 - spec.beta2.powi(*t);
                for i in 0..params.len() {
                    let g = grad[i];
                    m[i] = spec.beta1 * m[i] + (1.0 - spec.beta1) * g;
                    v[i] = spec.beta2 * v[i] + (1.0 - spec.beta2) * g * g;
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    params[i] -= spec.learning_rate * m_hat / (v_hat.sqrt() + spec.epsilon);
                }
            }
            // buf ← μ·buf + g; p ← p − lr·(g + μ·buf)
            Optimizer::SgdNesterov { spec, buf } => {
                for i in 0..params.len() {
                    buf[i] = spec.momentum * buf[i] + grad[i];
                    params[i] -= spec.learning_rate * (grad[i] + spec.momentum * buf[i]);
                }
            }
        }
    }
}
