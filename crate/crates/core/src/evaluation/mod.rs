//! Point and interval metrics, the seeded cross-validation harness, report
//! rendering and plot output.

pub mod cv;
pub mod metrics;
pub mod plot;
pub mod report;

use crate::dataset::DataError;
use crate::model::ModelError;
use crate::piml::PimlError;

pub use cv::{cross_validate, prepare_fold, Aggregate, AggregateSet, CvOutput, EvaluationReport, FoldPrediction, ModelReport, RunMetadata};
pub use metrics::{composite_metric, point_metrics, uq_metrics, MetricSet, PointMetrics};
pub use plot::{emit_plot, plot_svg};
pub use report::{folds_csv, render_report, report_from_json, report_json, summary_csv, table_rows, TABLE_COLUMNS};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no rows to evaluate")]
    Empty,
    #[error("mean interval width is zero; composite metric undefined")]
    ZeroWidth,
    #[error("report has no models")]
    EmptyReport,
    #[error("cannot write {path}: {source}")]
    FileWrite { path: String, source: std::io::Error },
    #[error("model `{model}` failed on fold {fold}: {source}")]
    Model { model: String, fold: usize, source: ModelError },
    #[error("physics augmentation failed on fold {fold}: {source}")]
    Piml { fold: usize, source: PimlError },
    #[error("csv output: {0}")]
    Csv(String),
    #[error("cannot parse report: {0}")]
    Parse(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl EvalError {
    fn csv(e: csv::Error) -> Self {
        EvalError::Csv(e.to_string())
    }
}
