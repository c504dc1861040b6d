//! Forecast-accuracy and goodness-of-fit measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: actual.len(), right: predicted.len() });
    }
    if actual.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let sse: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok((sse / actual.len() as f64).sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let sae: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(sae / actual.len() as f64)
}

/// Coefficient of determination against the mean-of-actual baseline; can be
/// negative. Undefined (error) when `actual` is constant.
pub fn r2(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    // Exact comparison: the computed mean of equal values can be off by an ulp.
    if actual.iter().all(|a| *a == actual[0]) {
        return Err(Error::Undefined("r2 of a constant response"));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::Undefined("r2 of a constant response"));
    }
    let sse: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok(1.0 - sse / sst)
}

/// `1 - (1 - r2)(n - 1)/(n - k - 1)` for `k` predictors.
pub fn adj_r2(actual: &[f64], predicted: &[f64], k: usize) -> Result<f64> {
    let r = r2(actual, predicted)?;
    let n = actual.len();
    if n <= k + 1 {
        return Err(Error::Undefined("adjusted r2 needs more observations than predictors + 1"));
    }
    Ok(1.0 - (1.0 - r) * (n - 1) as f64 / (n - k - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub mae: f64,
    pub r2: Option<f64>,
    pub adj_r2: Option<f64>,
    pub n: usize,
    pub k: usize,
}

impl MetricReport {
    /// R² and adjusted R² are left empty where undefined.
    pub fn compute(actual: &[f64], predicted: &[f64], k: usize) -> Result<Self> {
        Ok(Self {
            rmse: rmse(actual, predicted)?,
            mae: mae(actual, predicted)?,
            r2: r2(actual, predicted).ok(),
            adj_r2: adj_r2(actual, predicted, k).ok(),
            n: actual.len(),
            k,
        })
    }
}
