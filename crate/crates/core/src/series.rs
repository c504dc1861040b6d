//! Daily case-count series, variance-stabilising transforms, differencing and
//! sample correlation functions.

use std::io::{Read, Write};

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of observations accepted at ingestion.
pub const MIN_LEN: usize = 8;

/// Ordered daily observations indexed by calendar date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Validates spacing, finiteness and sign. Gaps are rejected, never imputed.
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch { left: dates.len(), right: values.len() });
        }
        if values.len() < MIN_LEN {
            return Err(Error::TooShort { needed: MIN_LEN, got: values.len() });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if *v < 0.0 {
                return Err(Error::NegativeValue { index: i, value: *v });
            }
        }
        for w in dates.windows(2) {
            let step = w[1].signed_duration_since(w[0]).num_days();
            if step <= 0 {
                return Err(Error::InvalidArgument(format!(
                    "dates must be strictly increasing: {} followed by {}",
                    w[0], w[1]
                )));
            }
            if step != 1 {
                return Err(Error::DateGap { prev: w[0], next: w[1] });
            }
        }
        Ok(Self { dates, values })
    }

    /// Consecutive daily series starting at `start`.
    pub fn from_values(start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        let dates = (0..values.len()).map(|i| start + Duration::days(i as i64)).collect();
        Self::new(dates, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        self.dates[self.dates.len() - 1]
    }

    /// The `h` dates following the last observation.
    pub fn future_dates(&self, h: usize) -> Vec<NaiveDate> {
        let last = self.last_date();
        (1..=h).map(|k| last + Duration::days(k as i64)).collect()
    }

    /// Reads the two-column `date,cases` ingestion format.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let date_col = headers.iter().position(|h| h == "date");
        let cases_col = headers.iter().position(|h| h == "cases");
        let (date_col, cases_col) = match (date_col, cases_col) {
            (Some(d), Some(c)) => (d, c),
            _ => {
                return Err(Error::Schema(format!(
                    "expected header with `date` and `cases` columns, found {:?}",
                    headers.iter().collect::<Vec<_>>()
                )))
            }
        };
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let raw_date = record.get(date_col).unwrap_or("");
            let raw_cases = record.get(cases_col).unwrap_or("");
            let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|e| {
                Error::Schema(format!("row {}: bad date `{raw_date}`: {e}", line + 2))
            })?;
            let cases: f64 = raw_cases.parse().map_err(|_| {
                Error::Schema(format!("row {}: bad case count `{raw_cases}`", line + 2))
            })?;
            dates.push(date);
            values.push(cases);
        }
        Self::new(dates, values)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["date", "cases"])?;
        for (d, v) in self.dates.iter().zip(&self.values) {
            wtr.write_record([d.format("%Y-%m-%d").to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Variance-stabilising transform applied before differencing.
///
/// Box-Cox is applied to `y + 1` so that zero counts stay admissible; with
/// `lambda == 0` it coincides with [`Transform::Log1p`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    None,
    #[default]
    Log1p,
    BoxCox {
        lambda: f64,
    },
}

impl Transform {
    pub fn forward_value(&self, y: f64) -> f64 {
        match *self {
            Transform::None => y,
            Transform::Log1p => y.ln_1p(),
            Transform::BoxCox { lambda: 0.0 } => y.ln_1p(),
            Transform::BoxCox { lambda } => ((y + 1.0).powf(lambda) - 1.0) / lambda,
        }
    }

    /// Back-transform; for the count transforms the result is clipped at 0.
    pub fn inverse_value(&self, z: f64) -> f64 {
        match *self {
            Transform::None => z,
            Transform::Log1p => z.exp_m1().max(0.0),
            Transform::BoxCox { lambda: 0.0 } => z.exp_m1().max(0.0),
            Transform::BoxCox { lambda } => {
                let base = lambda * z + 1.0;
                if base <= 0.0 {
                    0.0
                } else {
                    (base.powf(1.0 / lambda) - 1.0).max(0.0)
                }
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Result<Vec<f64>> {
        if !matches!(self, Transform::None) {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(Error::NegativeValue { index, value });
            }
        }
        Ok(values.iter().map(|&y| self.forward_value(y)).collect())
    }

    pub fn inverse(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&z| self.inverse_value(z)).collect()
    }
}

fn diff_once(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `d`-th order differences (`d <= 2`); the result has `n - d` elements.
pub fn difference(values: &[f64], d: usize) -> Result<Vec<f64>> {
    if d > 2 {
        return Err(Error::InvalidArgument(format!("differencing order {d} exceeds 2")));
    }
    if values.len() <= d {
        return Err(Error::TooShort { needed: d + 1, got: values.len() });
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = diff_once(&out);
    }
    Ok(out)
}

/// Undoes [`difference`] given the first `d` values of the original series.
pub fn inverse_difference(diffed: &[f64], anchors: &[f64], d: usize) -> Result<Vec<f64>> {
    if anchors.len() != d {
        return Err(Error::InvalidArgument(format!(
            "expected {d} anchor values, got {}",
            anchors.len()
        )));
    }
    // heads[k] is the first element of the k-th difference of the original series.
    let mut heads = Vec::with_capacity(d);
    let mut cur = anchors.to_vec();
    for _ in 0..d {
        heads.push(cur[0]);
        cur = diff_once(&cur);
    }
    let mut out = diffed.to_vec();
    for &head in heads.iter().rev() {
        let mut level = Vec::with_capacity(out.len() + 1);
        let mut acc = head;
        level.push(acc);
        for w in &out {
            acc += w;
            level.push(acc);
        }
        out = level;
    }
    Ok(out)
}

/// Continues an integrated series: given the undifferenced `history` and
/// future values of its `d`-th difference, returns the future levels.
pub fn integrate_forward(history: &[f64], d: usize, future_diffs: &[f64]) -> Vec<f64> {
    debug_assert!(history.len() > d);
    // tails[k] is the last element of the k-th difference of `history`.
    let mut tails = Vec::with_capacity(d);
    let mut cur = history.to_vec();
    for _ in 0..d {
        tails.push(*cur.last().unwrap());
        cur = diff_once(&cur);
    }
    future_diffs
        .iter()
        .map(|&w| {
            let mut v = w;
            for tail in tails.iter_mut().rev() {
                *tail += v;
                v = *tail;
            }
            v
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample autocorrelations for lags `0..=max_lag` (biased estimator).
///
/// A constant series has no defined correlation; it is reported as 1 at lag 0
/// and 0 elsewhere.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if max_lag >= n {
        return Err(Error::InvalidArgument(format!(
            "max_lag {max_lag} must be smaller than the series length {n}"
        )));
    }
    let m = mean(values);
    let centred: Vec<f64> = values.iter().map(|v| v - m).collect();
    let denom: f64 = centred.iter().map(|c| c * c).sum();
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for k in 1..=max_lag {
        if denom <= 0.0 {
            out.push(0.0);
            continue;
        }
        let num: f64 = centred[..n - k].iter().zip(&centred[k..]).map(|(a, b)| a * b).sum();
        out.push((num / denom).clamp(-1.0, 1.0));
    }
    Ok(out)
}

/// Partial autocorrelations for lags `0..=max_lag` via Durbin-Levinson.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(values, max_lag)?;
    Ok(durbin_levinson(&rho))
}

/// Partial autocorrelations from an autocorrelation sequence (`rho[0] == 1`).
pub fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let max_lag = rho.len() - 1;
    let mut out = vec![0.0; max_lag + 1];
    out[0] = 1.0;
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * rho[j]).sum::<f64>();
        if den.abs() < 1e-12 {
            break;
        }
        let pkk = (num / den).clamp(-1.0, 1.0);
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - pkk * prev[k - j - 1];
        }
        phi.push(pkk);
        out[k] = pkk;
    }
    out
}
