//! Tabular fatigue datasets: schemas, validation, CSV ingestion,
//! preprocessing and fold planning.

mod folds;
mod io;
mod scaler;
mod synth;

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::linalg::Matrix;

pub use folds::{kfold_split, FoldPlan};
pub use io::{load_csv, load_csv_unlabeled, write_csv};
pub use scaler::{scaler_apply, scaler_fit, Scaler};
pub use synth::{synth_generate, SynthSpec};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("header mismatch: missing columns {missing:?}, unexpected columns {extra:?}")]
    HeaderMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("row {row}, column `{column}`: {reason}")]
    RowParseError { row: usize, column: String, reason: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("empty split")]
    EmptySplit,
    #[error("target must be positive, got {value} at row {row}")]
    NonPositiveTarget { row: usize, value: f64 },
    #[error("dataset has no target column values")]
    MissingTarget,
    #[error("invalid fold count k = {k} for {n} rows (need 2 <= k <= n)")]
    InvalidK { k: usize, n: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite value at row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Composition,
    Condition,
    Measurement,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
}

/// Named columns with roles. Exactly one column is the target (fatigue life
/// in cycles) and one condition column holds the applied stress in MPa.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub columns: Vec<ColumnSpec>,
    pub stress_column: String,
    pub target_column: String,
}

const TITANIUM_SCHEMA: &str = include_str!("../../schemas/titanium.toml");
const CARBON_STEEL_SCHEMA: &str = include_str!("../../schemas/carbon_steel.toml");

impl DatasetSchema {
    pub fn new(
        columns: Vec<ColumnSpec>,
        stress_column: impl Into<String>,
        target_column: impl Into<String>,
    ) -> Result<Self, DataError> {
        let schema = Self { columns, stress_column: stress_column.into(), target_column: target_column.into() };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(DataError::InvalidSchema(format!("duplicate column `{}`", c.name)));
            }
        }
        let targets: Vec<_> = self.columns.iter().filter(|c| c.role == ColumnRole::Target).collect();
        if targets.len() != 1 {
            return Err(DataError::InvalidSchema(format!(
                "expected exactly one target column, found {}",
                targets.len()
            )));
        }
        if targets[0].name != self.target_column {
            return Err(DataError::InvalidSchema(format!(
                "target_column `{}` is not the column with role target (`{}`)",
                self.target_column, targets[0].name
            )));
        }
        match self.columns.iter().find(|c| c.name == self.stress_column) {
            Some(c) if c.role == ColumnRole::Condition => Ok(()),
            Some(_) => Err(DataError::InvalidSchema(format!(
                "stress column `{}` must have role condition",
                self.stress_column
            ))),
            None => Err(DataError::InvalidSchema(format!("stress column `{}` not declared", self.stress_column))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        let schema: Self = toml::from_str(text).map_err(|e| DataError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    /// Titanium-alloy table: 14 composition columns, 9 condition columns.
    pub fn titanium() -> Self {
        Self::from_toml(TITANIUM_SCHEMA).expect("shipped schema is valid")
    }

    /// Carbon-steel table: 8 composition columns, 8 condition columns.
    pub fn carbon_steel() -> Self {
        Self::from_toml(CARBON_STEEL_SCHEMA).expect("shipped schema is valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "titanium" => Some(Self::titanium()),
            "carbon_steel" => Some(Self::carbon_steel()),
            _ => None,
        }
    }

    /// Non-target column names in schema order.
    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().filter(|c| c.role != ColumnRole::Target).map(|c| c.name.clone()).collect()
    }

    pub fn role_of(&self, name: &str) -> Option<ColumnRole> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.role)
    }
}

/// Whether the target column holds raw cycles or log10 cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetScale {
    Cycles,
    Log10,
}

/// Immutable validated table. Features are stored row-major in schema
/// order; the target may be absent for holdout sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: DatasetSchema,
    feature_names: Vec<String>,
    features: Matrix,
    target: Option<Vec<f64>>,
    target_scale: TargetScale,
    provenance: String,
}

impl Dataset {
    /// Target values, when present, are validated against `scale`: raw
    /// cycles must be at least 1, log10 values finite.
    pub fn new(
        schema: DatasetSchema,
        features: Matrix,
        target: Option<Vec<f64>>,
        target_scale: TargetScale,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        schema.validate()?;
        let feature_names = schema.feature_names();
        if features.cols() != feature_names.len() {
            return Err(DataError::SchemaMismatch(format!(
                "{} feature columns in data, {} in schema",
                features.cols(),
                feature_names.len()
            )));
        }
        for (i, row) in features.iter_rows().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite { row: i, column: feature_names[j].clone() });
            }
        }
        if let Some(t) = &target {
            if t.len() != features.rows() {
                return Err(DataError::SchemaMismatch(format!(
                    "{} targets for {} rows",
                    t.len(),
                    features.rows()
                )));
            }
            for (row, &value) in t.iter().enumerate() {
                let ok = match target_scale {
                    TargetScale::Cycles => value >= 1.0 && value.is_finite(),
                    TargetScale::Log10 => value.is_finite(),
                };
                if !ok {
                    return Err(DataError::NonPositiveTarget { row, value });
                }
            }
        }
        Ok(Self { schema, feature_names, features, target, target_scale, provenance: provenance.into() })
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    pub fn require_target(&self) -> Result<&[f64], DataError> {
        self.target().ok_or(DataError::MissingTarget)
    }

    pub fn target_scale(&self) -> TargetScale {
        self.target_scale
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn feature_column(&self, name: &str) -> Option<Vec<f64>> {
        self.feature_index(name).map(|j| self.features.column(j))
    }

    /// Applied stress per row.
    pub fn stress(&self) -> Result<Vec<f64>, DataError> {
        self.feature_column(&self.schema.stress_column).ok_or_else(|| {
            DataError::SchemaMismatch(format!("stress column `{}` missing", self.schema.stress_column))
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(idx),
            target: self.target.as_ref().map(|t| idx.iter().map(|&i| t[i]).collect()),
            target_scale: self.target_scale,
            provenance: self.provenance.clone(),
        }
    }

    /// Same schema, new feature values.
    pub fn with_features(&self, features: Matrix) -> Result<Dataset, DataError> {
        Dataset::new(self.schema.clone(), features, self.target.clone(), self.target_scale, self.provenance.clone())
    }

    pub fn with_target(&self, target: Vec<f64>, scale: TargetScale) -> Result<Dataset, DataError> {
        Dataset::new(self.schema.clone(), self.features.clone(), Some(target), scale, self.provenance.clone())
    }

    /// Append a feature column; it is inserted into the schema just before
    /// the target column.
    pub fn with_appended_feature(&self, name: &str, role: ColumnRole, values: &[f64]) -> Result<Dataset, DataError> {
        if role == ColumnRole::Target {
            return Err(DataError::InvalidSchema("cannot append a second target".into()));
        }
        if values.len() != self.n_rows() {
            return Err(DataError::SchemaMismatch(format!("{} values for {} rows", values.len(), self.n_rows())));
        }
        let mut schema = self.schema.clone();
        let spec = ColumnSpec { name: name.to_string(), role };
        match schema.columns.iter().position(|c| c.role == ColumnRole::Target) {
            Some(t) => schema.columns.insert(t, spec),
            None => schema.columns.push(spec),
        }
        schema.validate()?;
        // the target is never stored among features, so appending after the
        // last feature preserves schema order
        let features = self.features.with_column(values);
        Dataset::new(schema, features, self.target.clone(), self.target_scale, self.provenance.clone())
    }

    /// SHA-256 over column names, feature values and targets.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.schema.columns {
            h.update(c.name.as_bytes());
            h.update([0u8]);
        }
        for v in self.features.data() {
            h.update(v.to_le_bytes());
        }
        if let Some(t) = &self.target {
            for v in t {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Replace cycles by log10(cycles).
pub fn target_log_transform(data: &Dataset) -> Result<Dataset, DataError> {
    let target = data.require_target()?;
    if data.target_scale == TargetScale::Log10 {
        return Ok(data.clone());
    }
    let logged = target
        .iter()
        .enumerate()
        .map(|(row, &v)| if v > 0.0 { Ok(v.log10()) } else { Err(DataError::NonPositiveTarget { row, value: v }) })
        .collect::<Result<Vec<_>, _>>()?;
    data.with_target(logged, TargetScale::Log10)
}

/// Cycles from log10 life.
pub fn target_log_inverse(y: f64) -> f64 {
    10f64.powf(y)
}
