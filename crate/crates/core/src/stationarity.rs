//! Augmented Dickey-Fuller unit-root test (constant, no trend).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::difference;

pub const ADF_MIN_LEN: usize = 20;

/// Dickey-Fuller critical values for the constant-only regression, indexed by
/// sample size (Fuller 1976 table). Columns: n, 1%, 5%, 10%.
const DF_TABLE: [(f64, f64, f64, f64); 6] = [
    (25.0, -3.75, -3.00, -2.63),
    (50.0, -3.58, -2.93, -2.60),
    (100.0, -3.51, -2.89, -2.58),
    (250.0, -3.46, -2.88, -2.57),
    (500.0, -3.44, -2.87, -2.57),
    (f64::INFINITY, -3.43, -2.86, -2.57),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub one_pct: f64,
    pub five_pct: f64,
    pub ten_pct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lags: usize,
    pub nobs: usize,
    pub critical_values: CriticalValues,
    /// Unit root rejected at the 5% level.
    pub reject_unit_root: bool,
}

/// Critical values interpolated linearly in `1/n` between table rows; sizes
/// below the first row use the first row.
pub fn critical_values(n: usize) -> CriticalValues {
    let inv = 1.0 / n as f64;
    let row = |r: (f64, f64, f64, f64)| CriticalValues { one_pct: r.1, five_pct: r.2, ten_pct: r.3 };
    if n as f64 <= DF_TABLE[0].0 {
        return row(DF_TABLE[0]);
    }
    for w in DF_TABLE.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if (n as f64) <= hi.0 {
            let (a, b) = (1.0 / lo.0, 1.0 / hi.0);
            let t = (a - inv) / (a - b);
            let lerp = |x: f64, y: f64| x + t * (y - x);
            return CriticalValues {
                one_pct: lerp(lo.1, hi.1),
                five_pct: lerp(lo.2, hi.2),
                ten_pct: lerp(lo.3, hi.3),
            };
        }
    }
    row(DF_TABLE[DF_TABLE.len() - 1])
}

/// Lag order `floor((n - 1)^(1/3))`.
pub fn default_lag_order(n: usize) -> usize {
    let mut k = ((n - 1) as f64).cbrt().floor() as usize;
    // guard against cbrt rounding just below an exact cube
    while (k + 1) * (k + 1) * (k + 1) < n {
        k += 1;
    }
    k
}

pub fn adf_test(values: &[f64]) -> Result<AdfResult> {
    let n = values.len();
    if n < ADF_MIN_LEN {
        return Err(Error::TooShort { needed: ADF_MIN_LEN, got: n });
    }
    let lags = default_lag_order(n);
    let cv = critical_values(n);

    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= 1e-12 * scale {
        // A constant series has no stochastic trend.
        return Ok(AdfResult {
            statistic: f64::NEG_INFINITY,
            lags,
            nobs: n - 1 - lags,
            critical_values: cv,
            reject_unit_root: true,
        });
    }

    let dy = difference(values, 1)?;
    let nobs = dy.len() - lags;
    let ncols = lags + 2;
    let x = DMatrix::from_fn(nobs, ncols, |r, c| {
        let i = r + lags;
        match c {
            0 => 1.0,
            1 => values[i],
            _ => dy[i - (c - 1)],
        }
    });
    let y = DVector::from_iterator(nobs, (lags..dy.len()).map(|i| dy[i]));

    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let xtx_inv = xtx
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular ADF design matrix".into()))?;
    let beta = &xtx_inv * xty;
    let resid = &y - &x * &beta;
    let rss = resid.norm_squared();
    let dof = nobs.saturating_sub(ncols).max(1) as f64;
    let s2 = rss / dof;
    let gamma = beta[1];

    let statistic = if s2 <= 1e-24 * scale * scale {
        // Exact fit: the sign of the level coefficient decides.
        if gamma < -1e-12 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    } else {
        gamma / (s2 * xtx_inv[(1, 1)]).sqrt()
    };

    Ok(AdfResult {
        statistic,
        lags,
        nobs,
        critical_values: cv,
        reject_unit_root: statistic < cv.five_pct,
    })
}
