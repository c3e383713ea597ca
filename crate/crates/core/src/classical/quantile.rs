use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeSpec};
use crate::linalg::Matrix;
use crate::model::{Diagnostics, ModelError, PredictiveDistribution};

/// Gradient-boosted quantile regression with one ensemble per quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QrSpec {
    /// Lower, central and upper quantile.
    pub quantiles: [f64; 3],
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for QrSpec {
    fn default() -> Self {
        Self { quantiles: [0.025, 0.5, 0.975], n_stages: 200, learning_rate: 0.05, max_depth: 3, min_samples_leaf: 5 }
    }
}

impl QrSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let q = self.quantiles;
        if !(0.0 < q[0] && q[0] < q[1] && q[1] < q[2] && q[2] < 1.0) {
            return Err(ModelError::InvalidSpec(format!("quantiles must be strictly increasing in (0, 1), got {q:?}")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(ModelError::InvalidSpec(format!("learning_rate must be in (0, 1], got {}", self.learning_rate)));
        }
        Ok(())
    }
}

/// Pinball (check) loss of predicting `pred` for `y` at level `tau`.
pub fn pinball_loss(y: f64, pred: f64, tau: f64) -> f64 {
    let r = y - pred;
    if r >= 0.0 {
        tau * r
    } else {
        (tau - 1.0) * r
    }
}

pub fn mean_pinball(y: &[f64], pred: &[f64], tau: f64) -> f64 {
    y.iter().zip(pred).map(|(&a, &b)| pinball_loss(a, b, tau)).sum::<f64>() / y.len() as f64
}

/// Lower empirical `tau`-quantile: the smallest sample `v` with
/// `#{x ≤ v} ≥ n·tau`. It minimizes the summed pinball loss.
pub fn empirical_quantile(values: &[f64], tau: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = ((n as f64 * tau - 1e-9).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEnsemble {
    pub tau: f64,
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    /// Mean training pinball loss after initialization and each stage.
    pub loss_trace: Vec<f64>,
}

impl QuantileEnsemble {
    pub fn fit(x: &Matrix, y: &[f64], tau: f64, spec: &QrSpec) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let tree_spec = TreeSpec { max_depth: spec.max_depth, min_samples_leaf: spec.min_samples_leaf };
        let all: Vec<usize> = (0..y.len()).collect();
        let init = empirical_quantile(y, tau);
        let mut f = vec![init; y.len()];
        let mut trees = Vec::with_capacity(spec.n_stages);
        let mut loss_trace = vec![mean_pinball(y, &f, tau)];
        for _ in 0..spec.n_stages {
            let grad: Vec<f64> = y.iter().zip(&f).map(|(&yi, &fi)| if yi > fi { tau } else { tau - 1.0 }).collect();
            let (mut tree, leaves) = RegressionTree::fit_rows(x, &grad, &all, tree_spec)?;
            for (node, rows) in &leaves {
                let resid: Vec<f64> = rows.iter().map(|&i| y[i] - f[i]).collect();
                let step = empirical_quantile(&resid, tau);
                tree.set_leaf_value(*node, step);
                for &i in rows {
                    f[i] += spec.learning_rate * step;
                }
            }
            trees.push(tree);
            loss_trace.push(mean_pinball(y, &f, tau));
        }
        Ok(Self { tau, init, learning_rate: spec.learning_rate, trees, loss_trace })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.init + self.trees.iter().map(|t| self.learning_rate * t.predict_row(row)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileModel {
    pub ensembles: Vec<QuantileEnsemble>,
}

/// Interval half-width in standard deviations used to turn the outer
/// quantiles into a spread.
const QR_STD_Z: f64 = 1.96;

impl QuantileModel {
    pub fn fit(x: &Matrix, y: &[f64], spec: &QrSpec, diag: &mut Diagnostics) -> Result<Self, ModelError> {
        spec.validate()?;
        let ensembles = spec
            .quantiles
            .par_iter()
            .map(|&tau| QuantileEnsemble::fit(x, y, tau, spec))
            .collect::<Result<Vec<_>, _>>()?;
        for e in &ensembles {
            diag.set(&format!("pinball_final_q{}", e.tau), *e.loss_trace.last().unwrap());
        }
        Ok(Self { ensembles })
    }

    /// Raw (unrepaired) quantile predictions, one inner vector per row.
    pub fn predict_quantiles(&self, x: &Matrix) -> Vec<Vec<f64>> {
        x.iter_rows().map(|row| self.ensembles.iter().map(|e| e.predict_row(row)).collect()).collect()
    }

    /// Quantiles are sorted per row before summarizing, so crossing
    /// ensembles still give `lower ≤ mean ≤ upper`.
    pub fn predict(&self, x: &Matrix) -> PredictiveDistribution {
        let n = x.rows();
        let mut d = PredictiveDistribution {
            mean: Vec::with_capacity(n),
            std: Vec::with_capacity(n),
            lower: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
            level: self.ensembles[2].tau - self.ensembles[0].tau,
            samples_available: false,
        };
        for mut q in self.predict_quantiles(x) {
            q.sort_by(f64::total_cmp);
            d.lower.push(q[0]);
            d.mean.push(q[1]);
            d.upper.push(q[2]);
            d.std.push((q[2] - q[0]) / (2.0 * QR_STD_Z));
        }
        d
    }
}
