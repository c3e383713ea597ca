use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::model::PredictiveDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub r2: f64,
    /// Undefined (None) when either vector is constant.
    pub pcc: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
}

fn check_lengths(a: usize, b: usize) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::LengthMismatch { expected: a, found: b });
    }
    if a == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn point_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<PointMetrics, EvalError> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let mean_t = y_true.iter().sum::<f64>() / n;
    let mean_p = y_pred.iter().sum::<f64>() / n;
    let (mut ss_res, mut ss_tot, mut abs) = (0.0, 0.0, 0.0);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        ss_res += (t - p) * (t - p);
        ss_tot += (t - mean_t) * (t - mean_t);
        abs += (t - p).abs();
        sxy += (t - mean_t) * (p - mean_p);
        sxx += (t - mean_t) * (t - mean_t);
        syy += (p - mean_p) * (p - mean_p);
    }
    let pcc = if sxx > 0.0 && syy > 0.0 { Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)) } else { None };
    Ok(PointMetrics { r2: 1.0 - ss_res / ss_tot, pcc, rmse: (ss_res / n).sqrt(), mae: abs / n })
}

/// Fraction of targets inside `[lower, upper]` (inclusive) and the mean
/// interval width.
pub fn uq_metrics(y_true: &[f64], dist: &PredictiveDistribution) -> Result<(f64, f64), EvalError> {
    check_lengths(y_true.len(), dist.len())?;
    let n = y_true.len() as f64;
    let covered = y_true
        .iter()
        .zip(dist.lower.iter().zip(&dist.upper))
        .filter(|(y, (l, u))| *l <= *y && *y <= *u)
        .count();
    let miw = dist.upper.iter().zip(&dist.lower).map(|(u, l)| u - l).sum::<f64>() / n;
    Ok((covered as f64 / n, miw))
}

/// `0.75·coverage + 0.25/miw`, coverage as a fraction.
pub fn composite_metric(coverage: f64, miw: f64) -> Result<f64, EvalError> {
    if !(miw > 0.0) {
        return Err(EvalError::ZeroWidth);
    }
    Ok(0.75 * coverage + 0.25 / miw)
}

/// All metrics for one (model, fold). UQ entries are None for point-only
/// models; `composite` is also None when every interval has zero width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub r2: f64,
    pub pcc: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
    pub coverage: Option<f64>,
    pub miw: Option<f64>,
    pub composite: Option<f64>,
}

impl MetricSet {
    pub fn compute(y_true: &[f64], dist: &PredictiveDistribution, with_uq: bool) -> Result<Self, EvalError> {
        let p = point_metrics(y_true, &dist.mean)?;
        let (coverage, miw, composite) = if with_uq {
            let (c, w) = uq_metrics(y_true, dist)?;
            (Some(c), Some(w), composite_metric(c, w).ok())
        } else {
            (None, None, None)
        };
        Ok(Self { r2: p.r2, pcc: p.pcc, rmse: p.rmse, mae: p.mae, coverage, miw, composite })
    }
}
