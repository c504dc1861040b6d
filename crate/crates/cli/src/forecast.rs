//! `forecast`: two-stage fit, h-step forecasts and comparison models.

use std::path::{Path, PathBuf};

use epiforecast::arima::{select_order_with, ArimaOrder, OrderSearch};
use epiforecast::hybrid::{fit_hybrid_with, forecast_hybrid, HybridForecast};
use epiforecast::metrics::MetricReport;
use epiforecast::series::{TimeSeries, Transform};
use epiforecast::wavelet::{decomposition_level, denoise, modwt, mra, wbf_fit};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::svg::{line_chart, Line};

#[derive(Debug, Clone, Serialize)]
pub struct ArimaSummary {
    pub order: ArimaOrder,
    pub selected_automatically: bool,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainingReport {
    pub arima: MetricReport,
    pub wbf: MetricReport,
    pub hybrid: MetricReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub input: String,
    pub n: usize,
    pub first_date: String,
    pub last_date: String,
    pub horizon: usize,
    pub transform: Transform,
    pub arima: ArimaSummary,
    pub residual_wbf_levels: Option<usize>,
    pub residual_wbf_fallbacks: Vec<String>,
    pub stage2_warning: Option<String>,
    pub wbf_levels: usize,
    pub wbf_fallbacks: Vec<String>,
    pub training: TrainingReport,
}

#[derive(Debug, Clone)]
pub struct ForecastRun {
    pub summary: FitSummary,
    pub forecast: HybridForecast,
    /// Pure wavelet forecast on the series itself, clipped at 0.
    pub wbf: Vec<f64>,
    pub files: Vec<PathBuf>,
}

pub fn stem(input: &Path) -> String {
    input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "series".into())
}

fn write(path: PathBuf, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    files.push(path);
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

pub fn run(input: &Path, cfg: &RunConfig) -> Result<ForecastRun> {
    let series = TimeSeries::from_csv_path(input).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let values = series.values();
    let h = cfg.horizon;

    let (order, auto) = match cfg.order {
        Some(o) => (o, false),
        None => {
            let search = OrderSearch { max_p: cfg.max_p, max_q: cfg.max_q, d: None };
            (select_order_with(values, cfg.transform, search)?.order, true)
        }
    };
    let fit = fit_hybrid_with(values, Some(order), cfg.transform)?;
    let forecast = forecast_hybrid(&fit, h)?;

    let wbf_model = wbf_fit(values)?;
    let wbf: Vec<f64> = wbf_model.forecast(h)?.into_iter().map(|v| v.max(0.0)).collect();
    let wbf_fitted = wbf_model.fitted_values();

    let b = &fit.base;
    let summary = FitSummary {
        input: input.display().to_string(),
        n: values.len(),
        first_date: series.first_date().to_string(),
        last_date: series.last_date().to_string(),
        horizon: h,
        transform: cfg.transform,
        arima: ArimaSummary {
            order,
            selected_automatically: auto,
            phi: b.phi.clone(),
            theta: b.theta.clone(),
            intercept: b.intercept,
            sigma2: b.sigma2,
            loglik: b.loglik,
            aic: b.aic,
            bic: b.bic,
        },
        residual_wbf_levels: fit.diagnostics.wbf_levels,
        residual_wbf_fallbacks: fit.diagnostics.wbf_fallbacks.clone(),
        stage2_warning: fit.diagnostics.stage2_warning.clone(),
        wbf_levels: wbf_model.levels,
        wbf_fallbacks: wbf_model.fallbacks().into_iter().map(|(n, w)| format!("{n}: {w}")).collect(),
        training: TrainingReport {
            arima: fit.diagnostics.arima_train,
            wbf: MetricReport::compute(values, &wbf_fitted, 0)?,
            hybrid: fit.diagnostics.hybrid_train,
        },
    };

    let out = &cfg.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let name = stem(input);
    let dates = series.future_dates(h);
    let mut files = Vec::new();

    let mut csv = String::from("date,arima,wbf_residual,hybrid\n");
    for (i, date) in dates.iter().enumerate() {
        csv += &format!("{},{},{},{}\n", date, num(forecast.arima[i]), num(forecast.wbf_residual[i]), num(forecast.hybrid[i]));
    }
    write(out.join(format!("{name}_forecast.csv")), &csv, &mut files)?;

    let mut csv = String::from("date,arima,wbf,hybrid\n");
    for (i, date) in dates.iter().enumerate() {
        csv += &format!("{},{},{},{}\n", date, num(forecast.arima[i]), num(wbf[i]), num(forecast.hybrid[i]));
    }
    write(out.join(format!("{name}_models.csv")), &csv, &mut files)?;

    // Components plus the series with the finest detail level removed.
    let dec = modwt(values, decomposition_level(values.len())?)?;
    let parts = mra(&dec);
    let denoised = denoise(&dec, 1)?;
    let mut csv = format!("date,{},denoised\n", parts.component_names().join(","));
    for (t, date) in series.dates().iter().enumerate() {
        let row: Vec<String> = parts.components().map(|c| num(c[t])).collect();
        csv += &format!("{date},{},{}\n", row.join(","), num(denoised[t]));
    }
    write(out.join(format!("{name}_mra.csv")), &csv, &mut files)?;

    write(out.join(format!("{name}_fit.json")), &(serde_json::to_string_pretty(&summary)? + "\n"), &mut files)?;

    let labels: Vec<String> = series.dates().iter().chain(&dates).map(|d| d.format("%m-%d").to_string()).collect();
    let n = values.len();
    // Forecast lines start at the last observation so they join the history.
    let join = |f: &[f64]| std::iter::once(values[n - 1]).chain(f.iter().copied()).collect::<Vec<f64>>();
    let (fa, fw, fh) = (join(&forecast.arima), join(&wbf), join(&forecast.hybrid));
    let chart = line_chart(
        &format!("{name}: training fit and {h}-day forecast"),
        &labels,
        &[
            Line { label: "observed", color: "black", offset: 0, values, dashed: false },
            Line { label: "hybrid fit", color: "#1f77b4", offset: 0, values: &fit.fitted_values, dashed: false },
            Line { label: "ARIMA forecast", color: "#ff7f0e", offset: n - 1, values: &fa, dashed: true },
            Line { label: "WBF forecast", color: "#2ca02c", offset: n - 1, values: &fw, dashed: true },
            Line { label: "hybrid forecast", color: "#1f77b4", offset: n - 1, values: &fh, dashed: true },
        ],
    );
    write(out.join(format!("{name}_plot.svg")), &chart, &mut files)?;

    Ok(ForecastRun { summary, forecast, wbf, files })
}

pub fn report(run: &ForecastRun) -> String {
    let s = &run.summary;
    let t = &s.training;
    let mut r = format!("{} ({} obs, {} to {})\n", s.input, s.n, s.first_date, s.last_date);
    r += &format!("stage 1: {}{}\n", s.arima.order, if s.arima.selected_automatically { " (AIC)" } else { "" });
    if let Some(w) = &s.stage2_warning {
        r += &format!("warning: {w}\n");
    }
    r += "training    RMSE        MAE\n";
    for (label, m) in [("ARIMA", &t.arima), ("WBF", &t.wbf), ("hybrid", &t.hybrid)] {
        r += &format!("{label:<8} {:>10.2} {:>10.2}\n", m.rmse, m.mae);
    }
    r
}
