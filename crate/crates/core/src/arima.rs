//! ARIMA(p,d,q) estimation by conditional sum of squares, information-criterion
//! order selection and iterated forecasting.
//!
//! The model on the transformed, `d`-times differenced series `w` is
//!
//! ```text
//! w_t = c + phi_1 w_{t-1} + ... + phi_p w_{t-p} + e_t - theta_1 e_{t-1} - ... - theta_q e_{t-q}
//! ```
//!
//! with the intercept `c` estimated only when `d == 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::series::{difference, integrate_forward, Transform};
use crate::stationarity::{adf_test, ADF_MIN_LEN};

pub const MAX_P: usize = 5;
pub const MAX_D: usize = 2;
pub const MAX_Q: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p > MAX_P || d > MAX_D || q > MAX_Q {
            return Err(Error::InvalidArgument(format!(
                "order ({p},{d},{q}) outside p<={MAX_P}, d<={MAX_D}, q<={MAX_Q}"
            )));
        }
        Ok(Self { p, d, q })
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)
    }
}

/// Estimation switches beyond the order itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    /// Number of leading observations of the differenced series to condition on.
    /// Defaults to `p`; order selection raises it to a common value so criteria
    /// are computed over the same observations.
    pub condition_on: Option<usize>,
    /// Estimate an intercept. Defaults to `d == 0`.
    pub include_mean: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Constant term of the model equation (0 when no intercept is estimated).
    pub intercept: f64,
    pub include_mean: bool,
    pub sigma2: f64,
    /// Innovations on the transformed, differenced scale; zero over the
    /// conditioning window.
    pub residuals: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// Observations entering the likelihood.
    pub n_eff: usize,
    pub transform: Transform,
    /// Training series on the transformed (undifferenced) scale.
    pub transformed: Vec<f64>,
}

/// True when all roots of `1 - c_1 z - ... - c_k z^k` lie outside the unit
/// circle, checked through the step-down (Schur-Cohn) recursion.
pub fn roots_outside_unit_circle(coeffs: &[f64]) -> bool {
    let mut a = coeffs.to_vec();
    while let Some(&kappa) = a.last() {
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return false;
        }
        let k = a.len();
        let denom = 1.0 - kappa * kappa;
        let prev: Vec<f64> = (0..k - 1).map(|j| (a[j] + kappa * a[k - 2 - j]) / denom).collect();
        a = prev;
    }
    true
}

struct Css<'a> {
    w: &'a [f64],
    p: usize,
    q: usize,
    start: usize,
    include_mean: bool,
}

impl Css<'_> {
    fn unpack<'b>(&self, params: &'b [f64]) -> (&'b [f64], &'b [f64], f64) {
        let phi = &params[..self.p];
        let theta = &params[self.p..self.p + self.q];
        let mu = if self.include_mean { params[self.p + self.q] } else { 0.0 };
        (phi, theta, mu)
    }

    fn intercept(phi: &[f64], mu: f64) -> f64 {
        mu * (1.0 - phi.iter().sum::<f64>())
    }

    fn residuals(&self, phi: &[f64], theta: &[f64], c: f64) -> Vec<f64> {
        let w = self.w;
        let mut e = vec![0.0; w.len()];
        for t in self.start..w.len() {
            let mut pred = c;
            for (i, ph) in phi.iter().enumerate() {
                pred += ph * w[t - i - 1];
            }
            for (j, th) in theta.iter().enumerate() {
                if t > j {
                    pred -= th * e[t - j - 1];
                }
            }
            e[t] = w[t] - pred;
        }
        e
    }

    fn objective(&self, params: &[f64]) -> f64 {
        let (phi, theta, mu) = self.unpack(params);
        if !roots_outside_unit_circle(phi) || !roots_outside_unit_circle(theta) {
            return f64::INFINITY;
        }
        let e = self.residuals(phi, theta, Self::intercept(phi, mu));
        let n_eff = (self.w.len() - self.start) as f64;
        e[self.start..].iter().map(|x| x * x).sum::<f64>() / n_eff
    }
}

pub fn fit_arima(values: &[f64], order: ArimaOrder, transform: Transform) -> Result<ArimaFit> {
    fit_arima_with(values, order, transform, FitOptions::default())
}

pub fn fit_arima_with(
    values: &[f64],
    order: ArimaOrder,
    transform: Transform,
    opts: FitOptions,
) -> Result<ArimaFit> {
    let ArimaOrder { p, d, q } = ArimaOrder::new(order.p, order.d, order.q)?;
    let n = values.len();
    if n <= d + p + q + 2 {
        return Err(Error::TooShort { needed: d + p + q + 3, got: n });
    }
    let transformed = transform.forward(values)?;
    let w = difference(&transformed, d)?;
    let start = opts.condition_on.unwrap_or(p).max(p);
    if w.len() <= start + 1 {
        return Err(Error::TooShort { needed: start + d + 2, got: n });
    }
    let include_mean = opts.include_mean.unwrap_or(d == 0);
    let css = Css { w: &w, p, q, start, include_mean };

    let mut x0 = vec![0.0; p + q];
    if include_mean {
        x0.push(w.iter().sum::<f64>() / w.len() as f64);
    }
    let min = NelderMead::default().minimize(|x| css.objective(x), &x0)?;
    if !min.value.is_finite() {
        return Err(Error::NonConvergence { restarts: NelderMead::default().max_restarts });
    }

    let (phi, theta, mu) = css.unpack(&min.x);
    let intercept = if include_mean { Css::intercept(phi, mu) } else { 0.0 };
    let residuals = css.residuals(phi, theta, intercept);
    let n_eff = w.len() - start;
    let sse: f64 = residuals[start..].iter().map(|x| x * x).sum();
    // An exact fit has zero variance; the floor keeps the criteria finite.
    let sigma2 = (sse / n_eff as f64).max(f64::MIN_POSITIVE);
    let loglik = -0.5 * n_eff as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = (p + q + 1 + usize::from(include_mean)) as f64;
    Ok(ArimaFit {
        order: ArimaOrder { p, d, q },
        phi: phi.to_vec(),
        theta: theta.to_vec(),
        intercept,
        include_mean,
        sigma2,
        residuals,
        loglik,
        aic: -2.0 * loglik + 2.0 * k,
        bic: -2.0 * loglik + k * (n_eff as f64).ln(),
        n_eff,
        transform,
        transformed,
    })
}

impl ArimaFit {
    /// Number of estimated parameters counted by the information criteria.
    pub fn n_params(&self) -> usize {
        self.order.p + self.order.q + 1 + usize::from(self.include_mean)
    }

    /// Mean of the differenced series implied by the intercept.
    pub fn mean(&self) -> f64 {
        let s: f64 = self.phi.iter().sum();
        if self.include_mean {
            self.intercept / (1.0 - s)
        } else {
            0.0
        }
    }

    /// The transformed, differenced series the model was estimated on.
    pub fn model_series(&self) -> Vec<f64> {
        difference(&self.transformed, self.order.d).expect("validated at fit time")
    }

    /// One-step in-sample predictions on the model scale; adding the
    /// residuals gives back [`Self::model_series`].
    pub fn model_fitted(&self) -> Vec<f64> {
        self.model_series().iter().zip(&self.residuals).map(|(w, e)| w - e).collect()
    }

    /// One-step in-sample predictions on the transformed level scale. The
    /// first `d` points cannot be predicted and are returned as observed.
    pub fn fitted_transformed(&self) -> Vec<f64> {
        let d = self.order.d;
        self.transformed
            .iter()
            .enumerate()
            .map(|(t, z)| if t < d { *z } else { z - self.residuals[t - d] })
            .collect()
    }

    /// In-sample predictions back on the original scale.
    pub fn fitted_values(&self) -> Vec<f64> {
        self.transform.inverse(&self.fitted_transformed())
    }

    /// Forecasts on the transformed level scale (before back-transforming).
    pub fn forecast_transformed(&self, h: usize) -> Vec<f64> {
        let mut w = self.model_series();
        let mut e = self.residuals.clone();
        let m = w.len();
        for _ in 0..h {
            let t = w.len();
            let mut pred = self.intercept;
            for (i, ph) in self.phi.iter().enumerate() {
                pred += ph * w[t - i - 1];
            }
            for (j, th) in self.theta.iter().enumerate() {
                pred -= th * e[t - j - 1];
            }
            w.push(pred);
            e.push(0.0);
        }
        integrate_forward(&self.transformed, self.order.d, &w[m..])
    }

    /// Back-transformed forecasts without the final non-negativity clip;
    /// used for sub-series that legitimately take negative values.
    pub fn forecast_raw(&self, h: usize) -> Vec<f64> {
        self.transform.inverse(&self.forecast_transformed(h))
    }

    /// `h` point forecasts on the original scale, clipped below at zero.
    pub fn forecast(&self, h: usize) -> Result<Vec<f64>> {
        if h == 0 {
            return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
        }
        Ok(self.forecast_raw(h).into_iter().map(|v| v.max(0.0)).collect())
    }
}

pub fn forecast_arima(fit: &ArimaFit, h: usize) -> Result<Vec<f64>> {
    fit.forecast(h)
}

/// Search space for [`select_order_with`].
#[derive(Debug, Clone, Copy)]
pub struct OrderSearch {
    pub max_p: usize,
    pub max_q: usize,
    /// Fixed differencing order; `None` picks it with the ADF test.
    pub d: Option<usize>,
}

impl Default for OrderSearch {
    fn default() -> Self {
        Self { max_p: MAX_P, max_q: MAX_Q, d: None }
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub order: ArimaOrder,
    pub aic: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub order: ArimaOrder,
    pub candidates: Vec<Candidate>,
    pub failed: Vec<ArimaOrder>,
}

/// Smallest `d` whose differenced series rejects a unit root; 2 if none do.
pub fn select_differencing(transformed: &[f64]) -> Result<usize> {
    for d in 0..MAX_D {
        let w = difference(transformed, d)?;
        if w.len() < ADF_MIN_LEN {
            return Ok(d);
        }
        if adf_test(&w)?.reject_unit_root {
            return Ok(d);
        }
    }
    Ok(MAX_D)
}

fn is_constant(values: &[f64]) -> bool {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    values.windows(2).all(|w| (w[1] - w[0]).abs() <= 1e-12 * scale)
}

/// `true` when `a` is preferred over `b`: lower AIC, then fewer coefficients,
/// then lower BIC, then smaller `p`.
fn better(a: &Candidate, b: &Candidate) -> bool {
    let tol = 1e-9 * (1.0 + a.aic.abs().max(b.aic.abs()));
    if (a.aic - b.aic).abs() > tol {
        return a.aic < b.aic;
    }
    let (sa, sb) = (a.order.p + a.order.q, b.order.p + b.order.q);
    if sa != sb {
        return sa < sb;
    }
    if a.bic != b.bic {
        return a.bic < b.bic;
    }
    a.order.p < b.order.p
}

pub fn select_order(values: &[f64], transform: Transform) -> Result<ArimaOrder> {
    if values.len() < ADF_MIN_LEN {
        return Err(Error::TooShort { needed: ADF_MIN_LEN, got: values.len() });
    }
    Ok(select_order_with(values, transform, OrderSearch::default())?.order)
}

/// Exhaustive `(p, q)` grid minimising AIC. Cells that fail to fit are
/// skipped; the selection is independent of evaluation order.
pub fn select_order_with(values: &[f64], transform: Transform, search: OrderSearch) -> Result<Selection> {
    let transformed = transform.forward(values)?;
    let d = match search.d {
        Some(d) if d <= MAX_D => d,
        Some(d) => return Err(Error::InvalidArgument(format!("differencing order {d} exceeds {MAX_D}"))),
        None => select_differencing(&transformed)?,
    };
    let n = values.len();
    if n <= d + 2 {
        return Err(Error::TooShort { needed: d + 3, got: n });
    }
    let w = difference(&transformed, d)?;
    if is_constant(&w) {
        let order = ArimaOrder::new(0, d, 0)?;
        return Ok(Selection { order, candidates: vec![], failed: vec![] });
    }

    let cells: Vec<ArimaOrder> = (0..=search.max_p.min(MAX_P))
        .flat_map(|p| (0..=search.max_q.min(MAX_Q)).map(move |q| ArimaOrder { p, d, q }))
        .filter(|o| n > o.d + o.p + o.q + 2)
        .collect();
    let condition_on = cells.iter().map(|o| o.p).max().unwrap_or(0);
    let results: Vec<(ArimaOrder, Result<ArimaFit>)> = cells
        .par_iter()
        .map(|&o| {
            let opts = FitOptions { condition_on: Some(condition_on), include_mean: None };
            (o, fit_arima_with(values, o, transform, opts))
        })
        .collect();

    let mut candidates = Vec::new();
    let mut failed = Vec::new();
    for (order, res) in results {
        match res {
            Ok(fit) if fit.aic.is_finite() => {
                candidates.push(Candidate { order, aic: fit.aic, bic: fit.bic })
            }
            _ => failed.push(order),
        }
    }
    let best = candidates
        .iter()
        .copied()
        .reduce(|best, c| if better(&c, &best) { c } else { best })
        .ok_or(Error::NoModel)?;
    Ok(Selection { order: best.order, candidates, failed })
}

/// Order selection followed by a fit at the selected order.
pub fn auto_arima(values: &[f64], transform: Transform, search: OrderSearch) -> Result<ArimaFit> {
    let selection = select_order_with(values, transform, search)?;
    fit_arima(values, selection.order, transform)
}
