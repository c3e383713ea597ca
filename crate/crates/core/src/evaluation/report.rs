use std::fmt::Write as _;

use super::cv::{Aggregate, EvaluationReport};
use super::EvalError;

pub const TABLE_COLUMNS: [&str; 8] = ["Model", "R2", "PCC", "RMSE", "MAE", "Coverage(%)", "MIW", "Composite"];

fn cell(a: Option<Aggregate>, scale: f64, digits: usize) -> String {
    match a {
        Some(a) => format!("{:.*} ± {:.*}", digits, a.mean * scale, digits, a.std * scale),
        None => "-".to_string(),
    }
}

/// One row of cells per model, in table column order.
pub fn table_rows(report: &EvaluationReport) -> Vec<Vec<String>> {
    report
        .models
        .iter()
        .map(|m| {
            let a = &m.aggregate;
            let uq = |x: Option<Aggregate>, scale: f64, d: usize| if m.has_uncertainty { cell(x, scale, d) } else { "-".into() };
            vec![
                m.name.clone(),
                cell(a.r2, 1.0, 4),
                cell(a.pcc, 1.0, 4),
                cell(a.rmse, 1.0, 4),
                cell(a.mae, 1.0, 4),
                uq(a.coverage, 100.0, 2),
                uq(a.miw, 1.0, 4),
                uq(a.composite, 1.0, 4),
            ]
        })
        .collect()
}

/// Plain-text table with aligned columns.
pub fn render_report(report: &EvaluationReport) -> Result<String, EvalError> {
    if report.models.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    let rows = table_rows(report);
    let mut widths: Vec<usize> = TABLE_COLUMNS.iter().map(|c| c.chars().count()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            let pad = w - c.chars().count();
            if i == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string()
    };
    let mut out = String::new();
    let header: Vec<String> = TABLE_COLUMNS.iter().map(|s| s.to_string()).collect();
    writeln!(out, "{}", line(&header)).unwrap();
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    writeln!(out, "{}", rule.join("-+-")).unwrap();
    for r in &rows {
        writeln!(out, "{}", line(r)).unwrap();
    }
    let m = &report.metadata;
    writeln!(out).unwrap();
    writeln!(out, "folds: {} (seed {}), rows: {}, dataset sha256: {}", m.k, m.seed, m.n_rows, m.dataset_hash).unwrap();
    if let Some(h) = &m.config_hash {
        writeln!(out, "config sha256: {h}").unwrap();
    }
    Ok(out)
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Aggregated metrics as CSV: one row per model, `<metric>_mean` and
/// `<metric>_std` columns. Missing values are empty cells.
pub fn summary_csv(report: &EvaluationReport) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let metrics = ["r2", "pcc", "rmse", "mae", "coverage", "miw", "composite"];
    let mut header = vec!["model".to_string()];
    for m in metrics {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    w.write_record(&header).map_err(EvalError::csv)?;
    for m in &report.models {
        let a = &m.aggregate;
        let mut rec = vec![m.name.clone()];
        for x in [a.r2, a.pcc, a.rmse, a.mae, a.coverage, a.miw, a.composite] {
            rec.push(num(x.map(|a| a.mean)));
            rec.push(num(x.map(|a| a.std)));
        }
        w.write_record(&rec).map_err(EvalError::csv)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| EvalError::csv(e.into_error().into()))?).expect("utf-8"))
}

/// Per-(model, fold) metrics as CSV.
pub fn folds_csv(report: &EvaluationReport) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "fold", "r2", "pcc", "rmse", "mae", "coverage", "miw", "composite"])
        .map_err(EvalError::csv)?;
    for m in &report.models {
        for (f, s) in m.folds.iter().enumerate() {
            w.write_record([
                m.name.clone(),
                f.to_string(),
                s.r2.to_string(),
                num(s.pcc),
                s.rmse.to_string(),
                s.mae.to_string(),
                num(s.coverage),
                num(s.miw),
                num(s.composite),
            ])
            .map_err(EvalError::csv)?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| EvalError::csv(e.into_error().into()))?).expect("utf-8"))
}

pub fn report_json(report: &EvaluationReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn report_from_json(text: &str) -> Result<EvaluationReport, EvalError> {
    serde_json::from_str(text).map_err(|e| EvalError::Parse(e.to_string()))
}
