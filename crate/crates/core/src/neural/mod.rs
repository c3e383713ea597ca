//! Small dense-network engine and the point NN, Deep Ensemble and MC
//! Dropout families.

pub mod mlp;
pub mod optim;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::model::{Diagnostics, LossSpec, ModelError, PredictiveDistribution};
use crate::piml::physics_loss_batch;
use crate::rng;

pub use mlp::{backward, forward_batch, DropoutMasks, Mlp, MlpShape};
pub use optim::{AdamSpec, NesterovSpec, Optimizer, OptimizerSpec};

/// Stream labels, so initialization, training masks and inference masks
/// never share random numbers.
const STREAM_INIT: u64 = 1;
const STREAM_TRAIN: u64 = 2;
const STREAM_PREDICT: u64 = 3;

/// Batch loss and its gradient with respect to each prediction.
pub fn loss_and_output_grad(y: &[f64], pred: &[f64], loss: &LossSpec) -> (f64, Vec<f64>) {
    match loss {
        LossSpec::Mse => {
            let n = y.len() as f64;
            let mut total = 0.0;
            let g = y
                .iter()
                .zip(pred)
                .map(|(&t, &p)| {
                    total += (t - p) * (t - p);
                    -2.0 * (t - p) / n
                })
                .collect();
            (total / n, g)
        }
        LossSpec::Physics(spec) => physics_loss_batch(y, pred, spec),
    }
}

/// Loss and parameter gradient for one batch.
pub fn mlp_loss_grad(
    shape: &MlpShape,
    params: &[f64],
    x: &Matrix,
    y: &[f64],
    loss: &LossSpec,
    masks: Option<&DropoutMasks>,
) -> (f64, Vec<f64>) {
    let cache = forward_batch(shape, params, x, masks);
    let (value, d_out) = loss_and_output_grad(y, cache.outputs(), loss);
    (value, backward(shape, params, &cache, &d_out, masks))
}

/// Full-batch training. Returns the loss before each update.
pub fn train_mlp(
    net: &mut Mlp,
    x: &Matrix,
    y: &[f64],
    loss: &LossSpec,
    optimizer: &OptimizerSpec,
    epochs: usize,
    rng: &mut rng::Rng,
) -> Result<Vec<f64>, ModelError> {
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if x.cols() != net.shape.input_dim {
        return Err(ModelError::DimensionMismatch { expected: net.shape.input_dim, found: x.cols() });
    }
    optimizer.validate()?;
    let mut opt = optimizer.state(net.params.len());
    let mut trace = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let masks = (net.shape.dropout > 0.0).then(|| DropoutMasks::sample(&net.shape, x.rows(), rng));
        let (value, grad) = mlp_loss_grad(&net.shape, &net.params, x, y, loss, masks.as_ref());
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(ModelError::NonFiniteLoss { epoch });
        }
        trace.push(value);
        opt.step(&mut net.params, &grad);
    }
    Ok(trace)
}

fn check_net(hidden: &[usize], dropout: f64, optimizer: &OptimizerSpec) -> Result<(), ModelError> {
    check_width(hidden)?;
    MlpShape::new(1, hidden, dropout)?;
    optimizer.validate()
}

impl NnSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_net(&self.hidden, self.dropout, &self.optimizer)
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_members == 0 {
            return Err(ModelError::NoMembers);
        }
        check_net(&self.hidden, self.dropout, &self.optimizer)
    }
}

impl McDropoutSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_samples == 0 {
            return Err(ModelError::NoSamples);
        }
        check_net(&self.hidden, self.dropout, &self.optimizer)
    }
}

fn check_width(hidden: &[usize]) -> Result<(), ModelError> {
    if hidden.is_empty() {
        return Err(ModelError::InvalidSpec("at least one hidden layer is required".into()));
    }
    Ok(())
}

/// Point-estimate network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnSpec {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub optimizer: OptimizerSpec,
}

impl Default for NnSpec {
    fn default() -> Self {
        Self { hidden: vec![1000, 200, 40], dropout: 0.0, epochs: 5000, optimizer: OptimizerSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub n_members: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub optimizer: OptimizerSpec,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { n_members: 5, hidden: vec![10, 10, 10], dropout: 0.5, epochs: 2000, optimizer: OptimizerSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McDropoutSpec {
    pub n_samples: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub optimizer: OptimizerSpec,
}

impl Default for McDropoutSpec {
    fn default() -> Self {
        Self { n_samples: 1000, hidden: vec![10, 10, 10], dropout: 0.5, epochs: 2000, optimizer: OptimizerSpec::default() }
    }
}

fn train_one(
    x: &Matrix,
    y: &[f64],
    hidden: &[usize],
    dropout: f64,
    epochs: usize,
    optimizer: &OptimizerSpec,
    loss: &LossSpec,
    seed: u64,
) -> Result<(Mlp, Vec<f64>), ModelError> {
    check_width(hidden)?;
    let shape = MlpShape::new(x.cols(), hidden, dropout)?;
    let mut net = Mlp::init(shape, &mut rng::stream(seed, STREAM_INIT));
    let trace = train_mlp(&mut net, x, y, loss, optimizer, epochs, &mut rng::stream(seed, STREAM_TRAIN))?;
    Ok((net, trace))
}

pub fn fit_point_nn(
    x: &Matrix,
    y: &[f64],
    spec: &NnSpec,
    loss: &LossSpec,
    seed: u64,
    diag: &mut Diagnostics,
) -> Result<Mlp, ModelError> {
    let (net, trace) = train_one(x, y, &spec.hidden, spec.dropout, spec.epochs, &spec.optimizer, loss, seed)?;
    if let Some(l) = trace.last() {
        diag.set("final_train_loss", *l);
    }
    Ok(net)
}

/// Member `i` is trained with seed `seed + i`.
pub fn fit_ensemble(
    x: &Matrix,
    y: &[f64],
    spec: &EnsembleSpec,
    loss: &LossSpec,
    seed: u64,
    diag: &mut Diagnostics,
) -> Result<Vec<Mlp>, ModelError> {
    if spec.n_members == 0 {
        return Err(ModelError::NoMembers);
    }
    let trained = (0..spec.n_members)
        .into_par_iter()
        .map(|i| {
            train_one(x, y, &spec.hidden, spec.dropout, spec.epochs, &spec.optimizer, loss, seed.wrapping_add(i as u64))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (i, (_, trace)) in trained.iter().enumerate() {
        if let Some(l) = trace.last() {
            diag.set(&format!("member{i}_final_train_loss"), *l);
        }
    }
    Ok(trained.into_iter().map(|(net, _)| net).collect())
}

/// Mean and population std of eval-mode member predictions.
pub fn ensemble_predict(members: &[Mlp], x: &Matrix, z: f64) -> Result<PredictiveDistribution, ModelError> {
    if members.is_empty() {
        return Err(ModelError::NoMembers);
    }
    let preds: Vec<Vec<f64>> = members.iter().map(|m| m.predict(x)).collect();
    Ok(PredictiveDistribution::from_samples(&preds, 0.0, z))
}

/// A network whose dropout stays on at inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDropoutModel {
    pub net: Mlp,
    pub n_samples: usize,
    pub seed: u64,
}

impl McDropoutModel {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        spec: &McDropoutSpec,
        loss: &LossSpec,
        seed: u64,
        diag: &mut Diagnostics,
    ) -> Result<Self, ModelError> {
        if spec.n_samples == 0 {
            return Err(ModelError::NoSamples);
        }
        let (net, trace) = train_one(x, y, &spec.hidden, spec.dropout, spec.epochs, &spec.optimizer, loss, seed)?;
        if let Some(l) = trace.last() {
            diag.set("final_train_loss", *l);
        }
        Ok(Self { net, n_samples: spec.n_samples, seed })
    }

    /// Sample `s` draws its masks from its own stream, so the result does
    /// not depend on how samples are scheduled.
    pub fn predict(&self, x: &Matrix, z: f64) -> Result<PredictiveDistribution, ModelError> {
        if self.n_samples == 0 {
            return Err(ModelError::NoSamples);
        }
        let base = rng::derive_seed(self.seed, STREAM_PREDICT);
        let samples: Vec<Vec<f64>> = (0..self.n_samples)
            .into_par_iter()
            .map(|s| {
                let mut r = rng::stream(base, s as u64);
                let masks = DropoutMasks::sample(&self.net.shape, x.rows(), &mut r);
                self.net.predict_masked(x, &masks)
            })
            .collect();
        Ok(PredictiveDistribution::from_samples(&samples, 0.0, z))
    }
}
