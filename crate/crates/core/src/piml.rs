//! Physics-informed components: Basquin-life feature augmentation and the
//! bounded-life training loss.
//!
//! Augmentation fits `σ = c·N^m` on the training rows only and appends the
//! fitted log10 life at each row's stress to every dataset, so held-out rows
//! never influence their own feature.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnRole, DataError, Dataset, TargetScale};
use crate::physics::{basquin_fit, basquin_life, BasquinFit, PhysicsError};

#[derive(Debug, thiserror::Error)]
pub enum PimlError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("Basquin fit failed on the whole training split: {0}")]
    DegenerateFit(PhysicsError),
    #[error("Basquin life evaluation failed: {0}")]
    Life(PhysicsError),
    #[error("invalid augmentation spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grouping {
    #[default]
    WholeDataset,
    /// One fit per distinct combination of these columns' values.
    ByCompositionKey { columns: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationSpec {
    pub grouping: Grouping,
    pub feature_name: String,
    /// Groups with fewer training rows use the whole-split fit.
    pub min_group_size: usize,
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        Self { grouping: Grouping::WholeDataset, feature_name: "basquin_log10_life".into(), min_group_size: 8 }
    }
}

/// Key of the whole-split fit in [`Augmented::fits`].
pub const WHOLE_SPLIT_KEY: &str = "*";

#[derive(Debug, Clone)]
pub struct Augmented {
    pub train: Dataset,
    pub others: Vec<Dataset>,
    pub fits: BTreeMap<String, BasquinFit>,
    pub diagnostics: Vec<String>,
}

fn group_keys(data: &Dataset, grouping: &Grouping) -> Result<Vec<String>, PimlError> {
    match grouping {
        Grouping::WholeDataset => Ok(vec![WHOLE_SPLIT_KEY.to_string(); data.n_rows()]),
        Grouping::ByCompositionKey { columns } => {
            let idx = columns
                .iter()
                .map(|c| {
                    data.feature_index(c)
                        .ok_or_else(|| PimlError::SchemaMismatch(format!("grouping column `{c}` not found")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(data
                .features()
                .iter_rows()
                .map(|row| idx.iter().map(|&j| row[j].to_string()).collect::<Vec<_>>().join("|"))
                .collect())
        }
    }
}

fn cycles(data: &Dataset) -> Result<Vec<f64>, PimlError> {
    let t = data.require_target()?;
    Ok(match data.target_scale() {
        TargetScale::Cycles => t.to_vec(),
        TargetScale::Log10 => t.iter().map(|y| 10f64.powf(*y)).collect(),
    })
}

/// Append `log10(basquin_life(fit, stress))` to `train` and every dataset in
/// `others`, with fits computed from `train` alone.
pub fn augment_basquin_feature(
    train: &Dataset,
    others: &[Dataset],
    spec: &AugmentationSpec,
) -> Result<Augmented, PimlError> {
    if spec.min_group_size < 2 {
        return Err(PimlError::InvalidSpec(format!("min_group_size must be >= 2, got {}", spec.min_group_size)));
    }
    if train.schema().role_of(&spec.feature_name).is_some() {
        return Err(PimlError::InvalidSpec(format!("column `{}` already exists", spec.feature_name)));
    }
    for (i, o) in others.iter().enumerate() {
        if o.feature_names() != train.feature_names() {
            return Err(PimlError::SchemaMismatch(format!("dataset {i} features differ from the training split")));
        }
    }
    let stress = train.stress().map_err(|e| PimlError::SchemaMismatch(e.to_string()))?;
    let life = cycles(train)?;
    let keys = group_keys(train, &spec.grouping)?;

    let all: Vec<(f64, f64)> = stress.iter().copied().zip(life.iter().copied()).collect();
    let whole = basquin_fit(&all).map_err(PimlError::DegenerateFit)?;
    let mut diagnostics = Vec::new();
    if !whole.is_physical() {
        diagnostics.push(format!("whole-split Basquin exponent m = {} is non-negative", whole.m));
    }
    let mut fits = BTreeMap::new();
    fits.insert(WHOLE_SPLIT_KEY.to_string(), whole);

    if matches!(spec.grouping, Grouping::ByCompositionKey { .. }) {
        let mut groups: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        for (k, p) in keys.iter().zip(&all) {
            groups.entry(k.as_str()).or_default().push(*p);
        }
        for (key, pts) in groups {
            if pts.len() < spec.min_group_size {
                diagnostics.push(format!("group `{key}` has {} rows; using whole-split fit", pts.len()));
                continue;
            }
            match basquin_fit(&pts) {
                Ok(f) if f.m != 0.0 => {
                    if !f.is_physical() {
                        diagnostics.push(format!("group `{key}` Basquin exponent m = {} is non-negative", f.m));
                    }
                    fits.insert(key.to_string(), f);
                }
                Ok(_) | Err(_) => diagnostics.push(format!("group `{key}` fit degenerate; using whole-split fit")),
            }
        }
    }

    let augment = |data: &Dataset| apply_basquin_fits(data, &fits, spec);
    Ok(Augmented {
        train: augment(train)?,
        others: others.iter().map(augment).collect::<Result<_, _>>()?,
        fits,
        diagnostics,
    })
}

/// Append the Basquin-life feature to `data` using previously computed
/// fits. Rows whose group has no fit of its own use the whole-split fit.
pub fn apply_basquin_fits(
    data: &Dataset,
    fits: &BTreeMap<String, BasquinFit>,
    spec: &AugmentationSpec,
) -> Result<Dataset, PimlError> {
    let whole = fits
        .get(WHOLE_SPLIT_KEY)
        .ok_or_else(|| PimlError::InvalidSpec("fits lack the whole-split entry".into()))?;
    let stress = data.stress().map_err(|e| PimlError::SchemaMismatch(e.to_string()))?;
    let keys = group_keys(data, &spec.grouping)?;
    let values = stress
        .iter()
        .zip(&keys)
        .map(|(s, k)| {
            let fit = fits.get(k).unwrap_or(whole);
            basquin_life(fit, *s).map(f64::log10).map_err(PimlError::Life)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(data.with_appended_feature(&spec.feature_name, ColumnRole::Condition, &values)?)
}

/// Weights and bounds of the bounded-life loss, in log10-life units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsLossSpec {
    /// Weight of the penalty below `lower_bound`.
    pub lambda1: f64,
    /// Weight of the penalty above `upper_bound`.
    pub lambda2: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Use the hinge arguments exactly as originally printed,
    /// `λ₁·ReLU(ŷ) + λ₂·ReLU(upper − ŷ)`, which penalize in-range
    /// predictions. Off by default.
    pub printed_form: bool,
}

impl Default for PhysicsLossSpec {
    fn default() -> Self {
        Self { lambda1: 1.0, lambda2: 1.0, lower_bound: 0.0, upper_bound: 7.0, printed_form: false }
    }
}

impl PhysicsLossSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(format!("lambdas must be >= 0, got ({}, {})", self.lambda1, self.lambda2));
        }
        if !(self.lower_bound < self.upper_bound) {
            return Err(format!("need lower_bound < upper_bound, got ({}, {})", self.lower_bound, self.upper_bound));
        }
        Ok(())
    }
}

/// Hinge penalty on a prediction and its subgradient (0 at the kinks).
pub fn bound_penalty(y_pred: f64, spec: &PhysicsLossSpec) -> (f64, f64) {
    let (below, above) = if spec.printed_form {
        (y_pred, spec.upper_bound - y_pred)
    } else {
        (spec.lower_bound - y_pred, y_pred - spec.upper_bound)
    };
    let mut value = 0.0;
    let mut grad = 0.0;
    if below > 0.0 {
        value += spec.lambda1 * below;
        grad += if spec.printed_form { spec.lambda1 } else { -spec.lambda1 };
    }
    if above > 0.0 {
        value += spec.lambda2 * above;
        grad += if spec.printed_form { -spec.lambda2 } else { spec.lambda2 };
    }
    (value, grad)
}

/// Per-sample loss `(y − ŷ)² + λ₁·ReLU(lower − ŷ) + λ₂·ReLU(ŷ − upper)` and
/// its derivative in `ŷ`.
pub fn physics_loss(y_true: f64, y_pred: f64, spec: &PhysicsLossSpec) -> (f64, f64) {
    let r = y_true - y_pred;
    let (pen, dpen) = bound_penalty(y_pred, spec);
    (r * r + pen, -2.0 * r + dpen)
}

/// Batch mean of [`physics_loss`] and the gradient with respect to each
/// prediction.
pub fn physics_loss_batch(y_true: &[f64], y_pred: &[f64], spec: &PhysicsLossSpec) -> (f64, Vec<f64>) {
    let n = y_true.len() as f64;
    let mut total = 0.0;
    let grads = y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| {
            let (l, g) = physics_loss(y, p, spec);
            total += l;
            g / n
        })
        .collect();
    (total / n, grads)
}
