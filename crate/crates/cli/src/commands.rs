use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fatigue_uq::dataset::{
    load_csv, load_csv_unlabeled, scaler_apply, scaler_fit, synth_generate, target_log_transform, write_csv,
    DataError, Scaler, SynthSpec,
};
use fatigue_uq::evaluation::{
    cross_validate, emit_plot, folds_csv, render_report, report_from_json, report_json, summary_csv, CvOutput,
    EvalError, EvaluationReport,
};
use fatigue_uq::model::{Diagnostics, ModelError};
use fatigue_uq::physics::BasquinFit;
use fatigue_uq::piml::{augment_basquin_feature, apply_basquin_fits, AugmentationSpec, PimlError};
use fatigue_uq::{fit, predict, Dataset, DatasetSchema, FittedModel, ModelSpec, PredictiveDistribution};
use serde::{Deserialize, Serialize};

use crate::config::{load_config, slug, LoadedConfig};
use crate::CliError;

fn data_err(e: DataError) -> CliError {
    match e {
        DataError::InvalidSpec(m) => CliError::Config(format!("invalid synthetic spec: {m}")),
        DataError::InvalidSchema(m) => CliError::Config(format!("invalid schema: {m}")),
        other => CliError::Data(other.to_string()),
    }
}

fn piml_err(e: PimlError) -> CliError {
    match e {
        PimlError::InvalidSpec(_) => CliError::Config(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

fn eval_err(e: EvalError) -> CliError {
    match e {
        EvalError::Model { .. } => CliError::Model(e.to_string()),
        EvalError::Piml { source: PimlError::InvalidSpec(_), .. } | EvalError::FileWrite { .. } | EvalError::EmptyReport => {
            CliError::Config(e.to_string())
        }
        EvalError::Data(d) => data_err(d),
        other => CliError::Data(other.to_string()),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("threads must be >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Basquin coefficient (MPa).
    #[arg(long, default_value_t = 2000.0)]
    pub c: f64,
    /// Basquin exponent; must be negative.
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    pub m: f64,
    /// Standard deviation of the scatter on log10 life.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 400.0)]
    pub stress_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub stress_max: f64,
    /// Number of irrelevant uniform feature columns.
    #[arg(long, default_value_t = 0)]
    pub nuisance: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn schema_path_for(csv: &Path) -> PathBuf {
    csv.with_extension("schema.toml")
}

pub fn cmd_synth(args: &SynthArgs) -> Result<String, CliError> {
    let spec = SynthSpec {
        c: args.c,
        m: args.m,
        noise_sigma: args.noise,
        n: args.n,
        stress_range: (args.stress_min, args.stress_max),
        n_nuisance: args.nuisance,
        seed: args.seed,
    };
    let data = synth_generate(&spec).map_err(data_err)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    write_csv(&data, &args.out).map_err(|e| CliError::Config(e.to_string()))?;
    let schema_path = schema_path_for(&args.out);
    write(&schema_path, &spec.schema().to_toml())?;
    Ok(format!("wrote {} ({} rows) and {}\n", args.out.display(), data.n_rows(), schema_path.display()))
}

fn load_dataset(lc: &LoadedConfig) -> Result<Dataset, CliError> {
    load_csv(&lc.dataset_path, &lc.schema).map_err(data_err)
}

fn predictions_csv(out: &CvOutput) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(["model", "fold", "row", "y_true", "mean", "std", "lower", "upper", "level"]).map_err(csv_err)?;
    for p in &out.predictions {
        let d = &p.dist;
        for (i, &row) in p.rows.iter().enumerate() {
            w.write_record([
                p.model.clone(),
                p.fold.to_string(),
                row.to_string(),
                p.y_true[i].to_string(),
                d.mean[i].to_string(),
                d.std[i].to_string(),
                d.lower[i].to_string(),
                d.upper[i].to_string(),
                d.level.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Held-out predictions of one model across all folds, in row order.
fn pooled(out: &CvOutput, model: &str) -> (Vec<f64>, PredictiveDistribution) {
    let mut rows: Vec<(usize, f64, f64, f64, f64, f64)> = Vec::new();
    let mut level = 0.0;
    for p in out.predictions.iter().filter(|p| p.model == model) {
        level = p.dist.level;
        for (i, &r) in p.rows.iter().enumerate() {
            rows.push((r, p.y_true[i], p.dist.mean[i], p.dist.std[i], p.dist.lower[i], p.dist.upper[i]));
        }
    }
    rows.sort_by_key(|r| r.0);
    let y = rows.iter().map(|r| r.1).collect();
    let dist = PredictiveDistribution {
        mean: rows.iter().map(|r| r.2).collect(),
        std: rows.iter().map(|r| r.3).collect(),
        lower: rows.iter().map(|r| r.4).collect(),
        upper: rows.iter().map(|r| r.5).collect(),
        level,
        samples_available: false,
    };
    (y, dist)
}

fn write_cv_outputs(dir: &Path, out: &CvOutput, emit_plots: bool) -> Result<String, CliError> {
    let report = &out.report;
    let table = render_report(report).map_err(eval_err)?;
    write(&dir.join("report.txt"), &table)?;
    write(&dir.join("report.json"), &report_json(report))?;
    write(&dir.join("summary.csv"), &summary_csv(report).map_err(eval_err)?)?;
    write(&dir.join("folds.csv"), &folds_csv(report).map_err(eval_err)?)?;
    write(&dir.join("predictions.csv"), &predictions_csv(out)?)?;
    let diagnostics: BTreeMap<&str, &Vec<Diagnostics>> =
        report.models.iter().map(|m| (m.name.as_str(), &m.diagnostics)).collect();
    write(&dir.join("diagnostics.json"), &serde_json::to_string_pretty(&diagnostics).expect("diagnostics serialize"))?;
    if emit_plots {
        let plots = dir.join("plots");
        std::fs::create_dir_all(&plots).map_err(|e| CliError::Config(format!("cannot create {}: {e}", plots.display())))?;
        for m in &report.models {
            let (y, dist) = pooled(out, &m.name);
            let title = format!("{}: held-out predictions, {} folds", m.name, report.metadata.k);
            emit_plot(&y, &dist, &plots.join(format!("{}.svg", slug(&m.name))), &title).map_err(eval_err)?;
        }
    }
    Ok(table)
}

fn run_cv(
    data: &Dataset,
    models: &[ModelSpec],
    lc: &LoadedConfig,
    augmentation: Option<&AugmentationSpec>,
) -> Result<CvOutput, CliError> {
    let cv = &lc.config.cv;
    let mut out = cross_validate(models, data, cv.k, cv.seed, augmentation).map_err(eval_err)?;
    out.report.metadata.config_hash = Some(lc.hash.clone());
    Ok(out)
}

/// Per-model fold-mean R² of the plain and physics-informed runs, and the
/// number of folds where the physics-informed run scored at least as well.
pub fn comparison_table(baseline: &EvaluationReport, piml: &EvaluationReport) -> String {
    let mut s = String::new();
    writeln!(s, "{:<16} {:>12} {:>12} {:>14}", "Model", "R2 baseline", "R2 PIML", "folds >= base").unwrap();
    let mut improved = 0;
    let mut uq = 0;
    for (b, p) in baseline.models.iter().zip(&piml.models) {
        let rb = b.aggregate.r2.map_or(f64::NAN, |a| a.mean);
        let rp = p.aggregate.r2.map_or(f64::NAN, |a| a.mean);
        let wins = b.folds.iter().zip(&p.folds).filter(|(b, p)| p.r2 >= b.r2).count();
        writeln!(s, "{:<16} {:>12.4} {:>12.4} {:>10} / {}", b.name, rb, rp, wins, b.folds.len()).unwrap();
        if b.has_uncertainty {
            uq += 1;
            if rp > rb {
                improved += 1;
            }
        }
    }
    writeln!(s, "\nUQ families with higher fold-mean R2 under PIML: {improved} of {uq}").unwrap();
    s
}

pub fn cmd_cv(config: &Path, threads: Option<usize>) -> Result<String, CliError> {
    let lc = load_config(config)?;
    let data = load_dataset(&lc)?;
    let c = &lc.config;
    let augmentation = c.piml.augment.then_some(&c.piml.augmentation);
    with_threads(threads.or(c.threads), || {
        if c.piml.compare_baseline && c.piml.any() {
            let base = run_cv(&data, &c.plain_models(), &lc, None)?;
            let piml = run_cv(&data, &c.models_with_physics_loss(), &lc, augmentation)?;
            let mut text = String::from("baseline\n");
            text += &write_cv_outputs(&lc.output_dir.join("baseline"), &base, c.emit_plots)?;
            text += "\nphysics-informed\n";
            text += &write_cv_outputs(&lc.output_dir.join("piml"), &piml, c.emit_plots)?;
            let cmp = comparison_table(&base.report, &piml.report);
            write(&lc.output_dir.join("comparison.txt"), &cmp)?;
            text += "\n";
            text += &cmp;
            Ok(text)
        } else {
            let out = run_cv(&data, &c.models_with_physics_loss(), &lc, augmentation)?;
            write_cv_outputs(&lc.output_dir, &out, c.emit_plots)
        }
    })?
}

/// Everything `predict` needs to reproduce the training preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub schema: DatasetSchema,
    pub augmentation: Option<AugmentationSpec>,
    pub basquin_fits: BTreeMap<String, BasquinFit>,
    pub scaler: Scaler,
    pub model: FittedModel,
    pub dataset_hash: String,
    pub config_hash: String,
}

fn bundle_path(lc: &LoadedConfig, name: &str) -> PathBuf {
    lc.output_dir.join("models").join(format!("{}.json", slug(name)))
}

pub fn cmd_fit(config: &Path, threads: Option<usize>) -> Result<String, CliError> {
    let lc = load_config(config)?;
    let data = load_dataset(&lc)?;
    let c = &lc.config;
    let (train, basquin_fits) = if c.piml.augment {
        let aug = augment_basquin_feature(&data, &[], &c.piml.augmentation).map_err(piml_err)?;
        (aug.train, aug.fits)
    } else {
        (data.clone(), BTreeMap::new())
    };
    let scaler = scaler_fit(&train).map_err(data_err)?;
    let train = target_log_transform(&scaler_apply(&scaler, &train).map_err(data_err)?).map_err(data_err)?;
    with_threads(threads.or(c.threads), || {
        let mut out = String::new();
        for spec in c.models_with_physics_loss() {
            let name = spec.display_name();
            let model = fit(&spec, &train).map_err(|e| CliError::Model(format!("model `{name}` failed on the full dataset: {e}")))?;
            let bundle = ModelBundle {
                schema: lc.schema.clone(),
                augmentation: c.piml.augment.then(|| c.piml.augmentation.clone()),
                basquin_fits: basquin_fits.clone(),
                scaler: scaler.clone(),
                model,
                dataset_hash: data.content_hash(),
                config_hash: lc.hash.clone(),
            };
            let path = bundle_path(&lc, &name);
            write(&path, &serde_json::to_string(&bundle).expect("bundle serializes"))?;
            writeln!(out, "fitted {name} -> {}", path.display()).unwrap();
        }
        Ok(out)
    })?
}

fn model_err(name: &str, e: ModelError) -> CliError {
    match e {
        ModelError::SchemaMismatch(_) | ModelError::DimensionMismatch { .. } | ModelError::Data(_) => {
            CliError::Data(format!("model `{name}`: {e}"))
        }
        other => CliError::Model(format!("model `{name}`: {other}")),
    }
}

pub fn cmd_predict(config: &Path, holdout: &Path, out: &Path, model: Option<&str>) -> Result<String, CliError> {
    let lc = load_config(config)?;
    let spec = match model {
        Some(m) => lc
            .config
            .models
            .iter()
            .find(|s| s.display_name() == m || slug(&s.display_name()) == slug(m))
            .ok_or_else(|| CliError::Config(format!("no model named `{m}` in the config")))?,
        None if lc.config.models.len() == 1 => &lc.config.models[0],
        None => return Err(CliError::Config("the config lists several models; choose one with --model".into())),
    };
    let name = spec.display_name();
    let path = bundle_path(&lc, &name);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Config(format!("no saved model at {} ({e}); run `fatigue-uq fit` first", path.display()))
    })?;
    let bundle: ModelBundle =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("corrupt model file {}: {e}", path.display())))?;

    let mut data = load_csv_unlabeled(holdout, &bundle.schema).map_err(data_err)?;
    if let Some(aug) = &bundle.augmentation {
        data = apply_basquin_fits(&data, &bundle.basquin_fits, aug).map_err(piml_err)?;
    }
    let data = scaler_apply(&bundle.scaler, &data).map_err(data_err)?;
    let dist = predict(&bundle.model, &data).map_err(|e| model_err(&name, e))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(["mean", "std", "lower", "upper"]).map_err(csv_err)?;
    for i in 0..dist.len() {
        w.write_record([dist.mean[i], dist.std[i], dist.lower[i], dist.upper[i]].map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    write(out, &String::from_utf8(bytes).expect("csv output is UTF-8"))?;
    Ok(format!("wrote {} predictions from {name} to {}\n", dist.len(), out.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
    Folds,
    Json,
}

pub fn cmd_report(input: &Path, format: ReportFormat) -> Result<String, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Data(format!("cannot read {}: {e}", input.display())))?;
    let report = report_from_json(&text).map_err(|e| CliError::Data(e.to_string()))?;
    match format {
        ReportFormat::Table => render_report(&report).map_err(eval_err),
        ReportFormat::Csv => summary_csv(&report).map_err(eval_err),
        ReportFormat::Folds => folds_csv(&report).map_err(eval_err),
        ReportFormat::Json => Ok(report_json(&report)),
    }
}

#[derive(Debug, Deserialize)]
struct PredictionRow {
    model: String,
    fold: usize,
    row: usize,
    y_true: f64,
    mean: f64,
    std: f64,
    lower: f64,
    upper: f64,
    level: f64,
}

pub fn cmd_plot(predictions: &Path, model: &str, fold: Option<usize>, out: &Path) -> Result<String, CliError> {
    let file = std::fs::File::open(predictions)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", predictions.display())))?;
    let mut rows = Vec::new();
    for r in csv::Reader::from_reader(file).deserialize::<PredictionRow>() {
        let r = r.map_err(|e| CliError::Data(format!("{}: {e}", predictions.display())))?;
        if r.model == model && fold.map_or(true, |f| f == r.fold) {
            rows.push(r);
        }
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("no predictions for model `{model}` in {}", predictions.display())));
    }
    rows.sort_by_key(|r| r.row);
    let y: Vec<f64> = rows.iter().map(|r| r.y_true).collect();
    let dist = PredictiveDistribution {
        mean: rows.iter().map(|r| r.mean).collect(),
        std: rows.iter().map(|r| r.std).collect(),
        lower: rows.iter().map(|r| r.lower).collect(),
        upper: rows.iter().map(|r| r.upper).collect(),
        level: rows[0].level,
        samples_available: false,
    };
    let title = match fold {
        Some(f) => format!("{model}: fold {f}"),
        None => format!("{model}: held-out predictions"),
    };
    emit_plot(&y, &dist, out, &title).map_err(eval_err)?;
    Ok(format!("wrote {}\n", out.display()))
}
