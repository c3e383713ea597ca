use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::MetricSet;
use super::EvalError;
use crate::dataset::{kfold_split, scaler_apply, scaler_fit, target_log_transform, Dataset, FoldPlan};
use crate::model::{self, Diagnostics, ModelSpec, PredictiveDistribution};
use crate::piml::{augment_basquin_feature, AugmentationSpec};

/// Mean and population standard deviation over the folds where a metric is
/// defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().flatten().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        Some(Self { mean, std, n: v.len() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateSet {
    pub r2: Option<Aggregate>,
    pub pcc: Option<Aggregate>,
    pub rmse: Option<Aggregate>,
    pub mae: Option<Aggregate>,
    pub coverage: Option<Aggregate>,
    pub miw: Option<Aggregate>,
    pub composite: Option<Aggregate>,
}

impl AggregateSet {
    pub fn of(folds: &[MetricSet]) -> Self {
        let agg = |f: fn(&MetricSet) -> Option<f64>| Aggregate::of(folds.iter().map(f));
        Self {
            r2: agg(|m| Some(m.r2)),
            pcc: agg(|m| m.pcc),
            rmse: agg(|m| Some(m.rmse)),
            mae: agg(|m| Some(m.mae)),
            coverage: agg(|m| m.coverage),
            miw: agg(|m| m.miw),
            composite: agg(|m| m.composite),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub family: String,
    pub has_uncertainty: bool,
    pub folds: Vec<MetricSet>,
    pub aggregate: AggregateSet,
    pub diagnostics: Vec<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub k: usize,
    pub n_rows: usize,
    pub dataset_hash: String,
    /// Filled in by callers that run from a config file.
    pub config_hash: Option<String>,
    pub augmentation: Option<AugmentationSpec>,
    pub fold_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: RunMetadata,
    pub models: Vec<ModelReport>,
}

/// Held-out predictions of one model on one fold, in log10-life units.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPrediction {
    pub model: String,
    pub fold: usize,
    pub rows: Vec<usize>,
    pub y_true: Vec<f64>,
    pub dist: PredictiveDistribution,
}

#[derive(Debug, Clone)]
pub struct CvOutput {
    pub report: EvaluationReport,
    pub predictions: Vec<FoldPrediction>,
}

/// Train and test splits for one fold, augmented (optionally), scaled on the
/// training rows and log-transformed.
pub fn prepare_fold(
    data: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    piml: Option<&AugmentationSpec>,
) -> Result<(Dataset, Dataset), EvalError> {
    let mut train = data.select_rows(&plan.train_indices(fold));
    let mut test = data.select_rows(plan.test_indices(fold));
    if let Some(spec) = piml {
        let aug = augment_basquin_feature(&train, &[test], spec).map_err(|e| EvalError::Piml { fold, source: e })?;
        train = aug.train;
        test = aug.others.into_iter().next().expect("one other split");
    }
    let scaler = scaler_fit(&train)?;
    let train = target_log_transform(&scaler_apply(&scaler, &train)?)?;
    let test = target_log_transform(&scaler_apply(&scaler, &test)?)?;
    Ok((train, test))
}

/// Seeded k-fold evaluation of every model on identical splits.
pub fn cross_validate(
    models: &[ModelSpec],
    data: &Dataset,
    k: usize,
    seed: u64,
    piml: Option<&AugmentationSpec>,
) -> Result<CvOutput, EvalError> {
    if models.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    data.require_target()?;
    let plan = kfold_split(data.n_rows(), k, seed)?;
    let splits = (0..k).map(|f| prepare_fold(data, &plan, f, piml)).collect::<Result<Vec<_>, _>>()?;

    let tasks: Vec<(usize, usize)> = (0..models.len()).flat_map(|m| (0..k).map(move |f| (m, f))).collect();
    let results = tasks
        .par_iter()
        .map(|&(m, f)| {
            let (train, test) = &splits[f];
            let spec = &models[m];
            let wrap = |e| EvalError::Model { model: spec.display_name(), fold: f, source: e };
            let fitted = model::fit(spec, train).map_err(wrap)?;
            let dist = model::predict(&fitted, test).map_err(wrap)?;
            let y = test.require_target()?.to_vec();
            let metrics = MetricSet::compute(&y, &dist, spec.family.has_uncertainty())?;
            Ok((metrics, fitted.diagnostics, y, dist))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut reports = Vec::with_capacity(models.len());
    let mut predictions = Vec::with_capacity(tasks.len());
    let mut it = results.into_iter();
    for spec in models {
        let mut folds = Vec::with_capacity(k);
        let mut diagnostics = Vec::with_capacity(k);
        for f in 0..k {
            let (metrics, diag, y_true, dist) = it.next().expect("one result per task");
            folds.push(metrics);
            diagnostics.push(diag);
            predictions.push(FoldPrediction {
                model: spec.display_name(),
                fold: f,
                rows: plan.test_indices(f).to_vec(),
                y_true,
                dist,
            });
        }
        reports.push(ModelReport {
            name: spec.display_name(),
            family: spec.family.label().to_string(),
            has_uncertainty: spec.family.has_uncertainty(),
            aggregate: AggregateSet::of(&folds),
            folds,
            diagnostics,
        });
    }
    let metadata = RunMetadata {
        seed,
        k,
        n_rows: data.n_rows(),
        dataset_hash: data.content_hash(),
        config_hash: None,
        augmentation: piml.cloned(),
        fold_sizes: plan.assignments.iter().map(Vec::len).collect(),
    };
    Ok(CvOutput { report: EvaluationReport { metadata, models: reports }, predictions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_uses_population_std() {
        let a = Aggregate::of([Some(1.0), Some(2.0), None, Some(3.0)]).unwrap();
        assert_eq!(a.mean, 2.0);
        assert_eq!(a.n, 3);
        assert!((a.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(Aggregate::of([None, None]).is_none());
    }
}
