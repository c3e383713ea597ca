use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::linalg::Matrix;

/// Per-feature min-max scaler learned on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    feature_names: Vec<String>,
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl Scaler {
    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    /// Columns that were constant on the training split; they scale to 0.
    pub fn constant_columns(&self) -> Vec<String> {
        self.feature_names
            .iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .filter(|(_, (lo, hi))| lo == hi)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        for (j, (x, o)) in row.iter().zip(out.iter_mut()).enumerate() {
            let span = self.maxs[j] - self.mins[j];
            *o = if span > 0.0 { (x - self.mins[j]) / span } else { 0.0 };
        }
    }
}

pub fn scaler_fit(train: &Dataset) -> Result<Scaler, DataError> {
    if train.is_empty() {
        return Err(DataError::EmptySplit);
    }
    let p = train.n_features();
    let mut mins = vec![f64::INFINITY; p];
    let mut maxs = vec![f64::NEG_INFINITY; p];
    for row in train.features().iter_rows() {
        for j in 0..p {
            mins[j] = mins[j].min(row[j]);
            maxs[j] = maxs[j].max(row[j]);
        }
    }
    Ok(Scaler { feature_names: train.feature_names().to_vec(), mins, maxs })
}

/// `x → (x − min)/(max − min)` per feature, without clamping. The target is
/// untouched.
pub fn scaler_apply(s: &Scaler, data: &Dataset) -> Result<Dataset, DataError> {
    if data.feature_names() != s.feature_names.as_slice() {
        return Err(DataError::SchemaMismatch(format!(
            "scaler fitted on {:?}, data has {:?}",
            s.feature_names,
            data.feature_names()
        )));
    }
    let mut out = Matrix::zeros(data.n_rows(), data.n_features());
    for i in 0..data.n_rows() {
        s.transform_row(data.features().row(i), out.row_mut(i));
    }
    data.with_features(out)
}
