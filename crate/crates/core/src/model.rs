//! The uniform fit/predict contract shared by all eight model families.
//!
//! Every family is trained on preprocessed data (scaled features, log10
//! targets) and returns a [`PredictiveDistribution`] with a point estimate,
//! a spread and interval bounds per row.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bayesian::{self, McmcSpec, ViSpec};
use crate::classical::{self, GprSpec, NgBoostSpec, QrSpec};
use crate::dataset::{DataError, Dataset};
use crate::linalg::Matrix;
use crate::neural::{self, EnsembleSpec, McDropoutSpec, NnSpec};
use crate::piml::PhysicsLossSpec;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{family} does not support the physics-informed loss")]
    UnsupportedLoss { family: &'static str },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("all training targets are identical, so the initial variance is zero; add jitter to the targets")]
    DegenerateVariance,
    #[error("kernel matrix not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("input has {found} features, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ensemble has no members")]
    NoMembers,
    #[error("at least one predictive sample is required")]
    NoSamples,
    #[error("posterior chain is empty")]
    EmptyChain,
    #[error("sampler failed: {0}")]
    Sampler(#[from] bayesian::SamplerError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Per-row predictive summary in log10-life units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Nominal coverage of `[lower, upper]`.
    pub level: f64,
    /// Whether the model retained raw posterior or ensemble samples.
    pub samples_available: bool,
}

/// Nominal coverage of `mean ± z·std` under a Normal predictive.
pub fn gaussian_level(z: f64) -> f64 {
    // Simpson's rule on the standard Normal density over [0, z].
    let n = 2000;
    let h = z / n as f64;
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for i in 1..n {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

impl PredictiveDistribution {
    /// `mean ± z·std`.
    pub fn gaussian(mean: Vec<f64>, std: Vec<f64>, z: f64, samples_available: bool) -> Self {
        let lower = mean.iter().zip(&std).map(|(m, s)| m - z * s).collect();
        let upper = mean.iter().zip(&std).map(|(m, s)| m + z * s).collect();
        Self { mean, std, lower, upper, level: gaussian_level(z), samples_available }
    }

    /// Point-only prediction: zero spread, degenerate interval.
    pub fn point(mean: Vec<f64>) -> Self {
        Self {
            std: vec![0.0; mean.len()],
            lower: mean.clone(),
            upper: mean.clone(),
            mean,
            level: 0.0,
            samples_available: false,
        }
    }

    /// Summarize per-row samples: `samples[s][i]` is draw `s` for row `i`.
    /// Uses the population standard deviation across draws plus
    /// `extra_variance` (e.g. observation noise).
    pub fn from_samples(samples: &[Vec<f64>], extra_variance: f64, z: f64) -> Self {
        let n_rows = samples.first().map_or(0, Vec::len);
        let k = samples.len() as f64;
        // Accumulate offsets from the first draw so identical draws give
        // exactly zero spread.
        let first = samples.first().cloned().unwrap_or_default();
        let mut mean = vec![0.0; n_rows];
        for s in samples {
            for ((m, v), v0) in mean.iter_mut().zip(s).zip(&first) {
                *m += v - v0;
            }
        }
        mean.iter_mut().zip(&first).for_each(|(m, v0)| *m = v0 + *m / k);
        let mut var = vec![0.0; n_rows];
        for s in samples {
            for ((acc, v), m) in var.iter_mut().zip(s).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|v| (v / k + extra_variance).sqrt()).collect();
        Self::gaussian(mean, std, z, true)
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Checks `lower ≤ mean ≤ upper` and `std ≥ 0` row-wise.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.mean.len();
        if self.std.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err("column lengths differ".into());
        }
        for i in 0..n {
            if !(self.lower[i] <= self.mean[i] && self.mean[i] <= self.upper[i]) {
                return Err(format!(
                    "row {i}: interval [{}, {}] does not contain mean {}",
                    self.lower[i], self.upper[i], self.mean[i]
                ));
            }
            if !(self.std[i] >= 0.0) {
                return Err(format!("row {i}: negative or NaN std {}", self.std[i]));
            }
        }
        Ok(())
    }
}

/// Training objective for the gradient-trained families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    #[default]
    Mse,
    Physics(PhysicsLossSpec),
}

impl LossSpec {
    pub fn physics(&self) -> Option<&PhysicsLossSpec> {
        match self {
            LossSpec::Mse => None,
            LossSpec::Physics(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    Qr(QrSpec),
    #[serde(rename = "ngboost")]
    NgBoost(NgBoostSpec),
    Gpr(GprSpec),
    Nn(NnSpec),
    DeepEnsemble(EnsembleSpec),
    McDropout(McDropoutSpec),
    BnnVi(ViSpec),
    BnnMcmc(McmcSpec),
}

impl ModelFamily {
    pub fn label(&self) -> &'static str {
        match self {
            ModelFamily::Qr(_) => "QR",
            ModelFamily::NgBoost(_) => "NGBoost",
            ModelFamily::Gpr(_) => "GPR",
            ModelFamily::Nn(_) => "NN",
            ModelFamily::DeepEnsemble(_) => "Deep Ensemble",
            ModelFamily::McDropout(_) => "MC Dropout",
            ModelFamily::BnnVi(_) => "BNN-VI",
            ModelFamily::BnnMcmc(_) => "BNN-MCMC",
        }
    }

    /// Families trained by explicit gradients on a per-sample loss, or whose
    /// likelihood can be shaped by the bound penalty.
    pub fn accepts_physics_loss(&self) -> bool {
        !matches!(self, ModelFamily::Qr(_) | ModelFamily::NgBoost(_) | ModelFamily::Gpr(_))
    }

    /// Hyperparameter checks that need no data.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelFamily::Qr(s) => s.validate(),
            ModelFamily::NgBoost(s) => s.validate(),
            ModelFamily::Gpr(s) => s.validate(),
            ModelFamily::Nn(s) => s.validate(),
            ModelFamily::DeepEnsemble(s) => s.validate(),
            ModelFamily::McDropout(s) => s.validate(),
            ModelFamily::BnnVi(s) => s.validate(),
            ModelFamily::BnnMcmc(s) => s.validate(),
        }
    }

    /// Point-only families have no interval.
    pub fn has_uncertainty(&self) -> bool {
        !matches!(self, ModelFamily::Nn(_))
    }

    /// Every family with default hyperparameters.
    pub fn all_defaults() -> Vec<ModelFamily> {
        vec![
            ModelFamily::Qr(QrSpec::default()),
            ModelFamily::NgBoost(NgBoostSpec::default()),
            ModelFamily::Gpr(GprSpec::default()),
            ModelFamily::Nn(NnSpec::default()),
            ModelFamily::DeepEnsemble(EnsembleSpec::default()),
            ModelFamily::McDropout(McDropoutSpec::default()),
            ModelFamily::BnnVi(ViSpec::default()),
            ModelFamily::BnnMcmc(McmcSpec::default()),
        ]
    }
}

fn default_z() -> f64 {
    1.96
}

/// A model family plus the settings every family shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Display name; defaults to the family label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub family: ModelFamily,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub loss: LossSpec,
    /// Interval half-width in standard deviations for Gaussian-form
    /// families.
    #[serde(default = "default_z")]
    pub interval_multiplier: f64,
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        Self { name: None, family, seed: 0, loss: LossSpec::Mse, interval_multiplier: default_z() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_loss(mut self, loss: LossSpec) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.family.label().to_string())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.family.validate()?;
        if let Some(p) = self.loss.physics() {
            if !self.family.accepts_physics_loss() {
                return Err(ModelError::UnsupportedLoss { family: self.family.label() });
            }
            p.validate().map_err(ModelError::InvalidSpec)?;
        }
        if !(self.interval_multiplier > 0.0 && self.interval_multiplier.is_finite()) {
            return Err(ModelError::InvalidSpec(format!(
                "interval_multiplier must be positive, got {}",
                self.interval_multiplier
            )));
        }
        Ok(())
    }
}

/// Scalar diagnostics and free-form notes collected during fitting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "snake_case")]
pub enum Fitted {
    Qr(classical::QuantileModel),
    NgBoost(classical::NgBoostModel),
    Gpr(classical::GprModel),
    Nn(neural::Mlp),
    DeepEnsemble(Vec<neural::Mlp>),
    McDropout(neural::McDropoutModel),
    BnnVi(bayesian::ViModel),
    BnnMcmc(bayesian::McmcModel),
}

/// Immutable trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub inner: Fitted,
    pub diagnostics: Diagnostics,
}

impl FittedModel {
    pub fn predict_matrix(&self, x: &Matrix) -> Result<PredictiveDistribution, ModelError> {
        if x.cols() != self.feature_names.len() {
            return Err(ModelError::DimensionMismatch { expected: self.feature_names.len(), found: x.cols() });
        }
        let z = self.spec.interval_multiplier;
        if x.rows() == 0 {
            let mut empty = PredictiveDistribution::point(Vec::new());
            empty.level = match &self.inner {
                Fitted::Nn(_) => 0.0,
                _ => gaussian_level(z),
            };
            return Ok(empty);
        }
        match &self.inner {
            Fitted::Qr(m) => Ok(m.predict(x)),
            Fitted::NgBoost(m) => Ok(m.predict(x, z)),
            Fitted::Gpr(m) => Ok(m.predict(x, z)),
            Fitted::Nn(net) => Ok(PredictiveDistribution::point(net.predict(x))),
            Fitted::DeepEnsemble(members) => neural::ensemble_predict(members, x, z),
            Fitted::McDropout(m) => m.predict(x, z),
            Fitted::BnnVi(m) => m.predict(x, z),
            Fitted::BnnMcmc(m) => m.predict(x, z),
        }
    }
}

/// Train `spec` on a preprocessed dataset (scaled features, log10 target).
pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<FittedModel, ModelError> {
    spec.validate()?;
    let y = train.require_target()?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let x = train.features();
    let mut diagnostics = Diagnostics::default();
    let seed = spec.seed;
    let loss = &spec.loss;
    let inner = match &spec.family {
        ModelFamily::Qr(s) => Fitted::Qr(classical::QuantileModel::fit(x, y, s, &mut diagnostics)?),
        ModelFamily::NgBoost(s) => Fitted::NgBoost(classical::NgBoostModel::fit(x, y, s, &mut diagnostics)?),
        ModelFamily::Gpr(s) => Fitted::Gpr(classical::GprModel::fit(x, y, s, &mut diagnostics)?),
        ModelFamily::Nn(s) => Fitted::Nn(neural::fit_point_nn(x, y, s, loss, seed, &mut diagnostics)?),
        ModelFamily::DeepEnsemble(s) => {
            Fitted::DeepEnsemble(neural::fit_ensemble(x, y, s, loss, seed, &mut diagnostics)?)
        }
        ModelFamily::McDropout(s) => {
            Fitted::McDropout(neural::McDropoutModel::fit(x, y, s, loss, seed, &mut diagnostics)?)
        }
        ModelFamily::BnnVi(s) => Fitted::BnnVi(bayesian::ViModel::fit(x, y, s, loss, seed, &mut diagnostics)?),
        ModelFamily::BnnMcmc(s) => {
            Fitted::BnnMcmc(bayesian::McmcModel::fit(x, y, s, loss, seed, &mut diagnostics)?)
        }
    };
    Ok(FittedModel { spec: spec.clone(), feature_names: train.feature_names().to_vec(), inner, diagnostics })
}

/// Predict on a dataset with the training feature schema; the target may be
/// absent.
pub fn predict(model: &FittedModel, test: &Dataset) -> Result<PredictiveDistribution, ModelError> {
    if test.feature_names() != model.feature_names.as_slice() {
        return Err(ModelError::SchemaMismatch(format!(
            "model trained on {:?}, test has {:?}",
            model.feature_names,
            test.feature_names()
        )));
    }
    model.predict_matrix(test.features())
}
