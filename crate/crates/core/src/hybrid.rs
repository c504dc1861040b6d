//! Two-stage ARIMA + WBF forecaster: ARIMA models the series, WBF models the
//! level-scale ARIMA residuals, and the two are added.

use serde::{Deserialize, Serialize};

use crate::arima::{fit_arima, select_order, ArimaFit, ArimaOrder};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::series::Transform;
use crate::stationarity::ADF_MIN_LEN;
use crate::wavelet::WbfFit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridDiagnostics {
    pub order: ArimaOrder,
    pub wbf_levels: Option<usize>,
    /// Set when stage 2 failed and the model fell back to pure ARIMA.
    pub stage2_warning: Option<String>,
    /// Components of the residual model that used the degenerate fallback.
    pub wbf_fallbacks: Vec<String>,
    pub arima_train: MetricReport,
    pub hybrid_train: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridFit {
    pub base: ArimaFit,
    pub residual_model: Option<WbfFit>,
    /// `actual - base_fitted`, the series stage 2 is trained on.
    pub residuals: Vec<f64>,
    pub base_fitted: Vec<f64>,
    pub residual_fitted: Vec<f64>,
    /// `base_fitted + residual_fitted`.
    pub fitted_values: Vec<f64>,
    pub diagnostics: HybridDiagnostics,
}

/// Selects the stage-1 order by AIC and fits both stages with the log1p transform.
pub fn fit_hybrid(values: &[f64]) -> Result<HybridFit> {
    fit_hybrid_with(values, None, Transform::Log1p)
}

/// As [`fit_hybrid`] with an optional fixed stage-1 order.
pub fn fit_hybrid_with(values: &[f64], order: Option<ArimaOrder>, transform: Transform) -> Result<HybridFit> {
    if values.len() < ADF_MIN_LEN {
        return Err(Error::TooShort { needed: ADF_MIN_LEN, got: values.len() });
    }
    let order = match order {
        Some(o) => o,
        None => select_order(values, transform)?,
    };
    let base = fit_arima(values, order, transform)?;
    let base_fitted = base.fitted_values();
    let residuals: Vec<f64> = values.iter().zip(&base_fitted).map(|(y, f)| y - f).collect();

    let (residual_model, stage2_warning) = match crate::wavelet::wbf_fit(&residuals) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(format!("residual model failed, using ARIMA only: {e}"))),
    };
    let residual_fitted = match &residual_model {
        Some(m) => m.fitted_values(),
        None => vec![0.0; values.len()],
    };
    let fitted_values: Vec<f64> = base_fitted.iter().zip(&residual_fitted).map(|(a, b)| a + b).collect();

    let diagnostics = HybridDiagnostics {
        order,
        wbf_levels: residual_model.as_ref().map(|m| m.levels),
        stage2_warning,
        wbf_fallbacks: residual_model
            .as_ref()
            .map(|m| m.fallbacks().into_iter().map(|(name, why)| format!("{name}: {why}")).collect())
            .unwrap_or_default(),
        arima_train: MetricReport::compute(values, &base_fitted, base.n_params())?,
        hybrid_train: MetricReport::compute(values, &fitted_values, base.n_params())?,
    };
    Ok(HybridFit { base, residual_model, residuals, base_fitted, residual_fitted, fitted_values, diagnostics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridForecast {
    pub arima: Vec<f64>,
    pub wbf_residual: Vec<f64>,
    /// `arima + wbf_residual` before clipping.
    pub combined: Vec<f64>,
    /// `combined` clipped below at zero.
    pub hybrid: Vec<f64>,
}

pub fn forecast_hybrid(fit: &HybridFit, h: usize) -> Result<HybridForecast> {
    let arima = fit.base.forecast(h)?;
    let wbf_residual = match &fit.residual_model {
        Some(m) => m.forecast(h)?,
        None => vec![0.0; h],
    };
    let combined: Vec<f64> = arima.iter().zip(&wbf_residual).map(|(a, w)| a + w).collect();
    let hybrid = combined.iter().map(|v| v.max(0.0)).collect();
    Ok(HybridForecast { arima, wbf_residual, combined, hybrid })
}
