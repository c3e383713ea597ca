use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use super::{DataError, Dataset, DatasetSchema, TargetScale};
use crate::linalg::Matrix;

/// Load a labeled table. The header must contain exactly the schema's
/// columns, in any order. Rows are numbered from 1 (the first data line).
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<Dataset, DataError> {
    load(path, schema, true)
}

/// Like [`load_csv`] but the target column may be absent; if present it is
/// still parsed and validated.
pub fn load_csv_unlabeled(path: &Path, schema: &DatasetSchema) -> Result<Dataset, DataError> {
    load(path, schema, false)
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DataError::FileNotFound(path.to_path_buf()),
        _ => DataError::Io { path: path.to_path_buf(), source: e },
    })
}

fn load(path: &Path, schema: &DatasetSchema, target_required: bool) -> Result<Dataset, DataError> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(open(path)?);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();

    let present: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    let expected: BTreeSet<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    let mut missing: Vec<String> = expected.difference(&present).map(|s| s.to_string()).collect();
    let extra: Vec<String> = present.difference(&expected).map(|s| s.to_string()).collect();
    let has_target = present.contains(schema.target_column.as_str());
    if !target_required {
        missing.retain(|m| *m != schema.target_column);
    }
    if !missing.is_empty() || !extra.is_empty() || header.len() != present.len() {
        return Err(DataError::HeaderMismatch { missing, extra });
    }

    let feature_names = schema.feature_names();
    let feature_pos: Vec<usize> =
        feature_names.iter().map(|n| header.iter().position(|h| h == n).expect("checked")).collect();
    let target_pos = header.iter().position(|h| *h == schema.target_column);

    let mut values = Vec::new();
    let mut target = Vec::new();
    let mut n_rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::RowParseError {
            row,
            column: String::new(),
            reason: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(DataError::RowParseError {
                row,
                column: String::new(),
                reason: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let cell = |pos: usize, name: &str| -> Result<f64, DataError> {
            let raw = &record[pos];
            if raw.is_empty() {
                return Err(DataError::RowParseError { row, column: name.to_string(), reason: "missing value".into() });
            }
            let v: f64 = raw.parse().map_err(|_| DataError::RowParseError {
                row,
                column: name.to_string(),
                reason: format!("cannot parse `{raw}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(DataError::RowParseError { row, column: name.to_string(), reason: "non-finite value".into() });
            }
            Ok(v)
        };
        for (name, &pos) in feature_names.iter().zip(&feature_pos) {
            values.push(cell(pos, name)?);
        }
        if let Some(pos) = target_pos {
            let v = cell(pos, &schema.target_column)?;
            if v < 1.0 {
                return Err(DataError::RowParseError {
                    row,
                    column: schema.target_column.clone(),
                    reason: format!("fatigue life must be >= 1 cycle, got {v}"),
                });
            }
            target.push(v);
        }
        n_rows += 1;
    }
    let features = Matrix::from_vec(n_rows, feature_names.len(), values);
    Dataset::new(
        schema.clone(),
        features,
        has_target.then_some(target),
        TargetScale::Cycles,
        path.display().to_string(),
    )
}

fn csv_error(path: &Path, e: csv::Error) -> DataError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::Io { path: path.to_path_buf(), source },
        other => DataError::RowParseError { row: 0, column: String::new(), reason: format!("{other:?}") },
    }
}

/// Write features then target (when present) in schema order. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<(), DataError> {
    let io = |source| DataError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io)?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    if data.target().is_some() {
        header.push(&data.schema().target_column);
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for i in 0..data.n_rows() {
        let mut rec: Vec<String> = data.features().row(i).iter().map(|v| v.to_string()).collect();
        if let Some(t) = data.target() {
            rec.push(t[i].to_string());
        }
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(io)
}
