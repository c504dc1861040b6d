//! `eval`: error metrics of a forecast file against observed counts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use epiforecast::metrics::{mae, rmse};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub actual: String,
    pub forecast: String,
    pub column: String,
    pub n: usize,
    pub first_date: String,
    pub last_date: String,
    pub rmse: f64,
    pub mae: f64,
}

/// `date -> value` for `column`, or for `hybrid`, `cases`, or the only value
/// column when `column` is `None`.
pub fn read_dated(path: &Path, column: Option<&str>) -> Result<(String, BTreeMap<NaiveDate, f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let date_i = headers.iter().position(|h| h == "date").ok_or_else(|| bad("no `date` column".into()))?;
    let value_cols: Vec<&str> = headers.iter().filter(|h| *h != "date").collect();
    let col = match column {
        Some(c) => c.to_string(),
        None => ["hybrid", "cases"]
            .into_iter()
            .find(|c| value_cols.contains(c))
            .map(str::to_string)
            .or_else(|| (value_cols.len() == 1).then(|| value_cols[0].to_string()))
            .ok_or_else(|| bad(format!("choose a column with --column among {value_cols:?}")))?,
    };
    let val_i = headers.iter().position(|h| h == col).ok_or_else(|| bad(format!("no `{col}` column")))?;
    let mut out = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let raw_d = rec.get(date_i).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_d, "%Y-%m-%d")
            .map_err(|_| bad(format!("line {}: bad date `{raw_d}`", line + 2)))?;
        let raw_v = rec.get(val_i).unwrap_or("");
        let v: f64 = raw_v.parse().map_err(|_| bad(format!("line {}: bad value `{raw_v}`", line + 2)))?;
        if !v.is_finite() {
            return Err(bad(format!("line {}: non-finite value", line + 2)));
        }
        if out.insert(date, v).is_some() {
            return Err(bad(format!("line {}: duplicate date {date}", line + 2)));
        }
    }
    Ok((col, out))
}

pub fn evaluate(actual: &Path, forecast: &Path, column: Option<&str>) -> Result<EvalReport> {
    let (_, obs) = read_dated(actual, Some("cases"))?;
    let (col, pred) = read_dated(forecast, column)?;
    let common: Vec<(NaiveDate, f64, f64)> =
        obs.iter().filter_map(|(d, a)| pred.get(d).map(|p| (*d, *a, *p))).collect();
    if common.is_empty() {
        return Err(CliError::EmptyIntersection {
            actual: actual.display().to_string(),
            forecast: forecast.display().to_string(),
        });
    }
    let a: Vec<f64> = common.iter().map(|c| c.1).collect();
    let p: Vec<f64> = common.iter().map(|c| c.2).collect();
    Ok(EvalReport {
        actual: actual.display().to_string(),
        forecast: forecast.display().to_string(),
        column: col,
        n: common.len(),
        first_date: common[0].0.to_string(),
        last_date: common[common.len() - 1].0.to_string(),
        rmse: rmse(&a, &p)?,
        mae: mae(&a, &p)?,
    })
}

pub fn run(actual: &Path, forecast: &Path, column: Option<&str>, out: &Path) -> Result<(EvalReport, PathBuf)> {
    let report = evaluate(actual, forecast, column)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join("eval.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok((report, path))
}
