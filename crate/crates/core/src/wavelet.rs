//! Haar maximal overlap discrete wavelet transform (periodic boundary),
//! multiresolution analysis, denoising and the wavelet-based forecaster.
//!
//! Level-`j` coefficients use the rescaled Haar filters
//! `h = (1/2, -1/2)`, `g = (1/2, 1/2)` applied with stride `2^(j-1)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::arima::{fit_arima, select_order_with, ArimaFit, ArimaOrder, OrderSearch};
use crate::error::{Error, Result};
use crate::series::{Transform, MIN_LEN};

/// `floor(ln n)`.
pub fn decomposition_level(n: usize) -> Result<usize> {
    if n < MIN_LEN {
        return Err(Error::TooShort { needed: MIN_LEN, got: n });
    }
    Ok((n as f64).ln().floor() as usize)
}

/// Largest admissible level, `floor(log2 n)`.
pub fn max_level(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModwtDecomposition {
    /// Wavelet coefficients `W_1..W_J`, each of the input length.
    pub details: Vec<Vec<f64>>,
    /// Scaling coefficients `V_J`.
    pub smooth: Vec<f64>,
    pub levels: usize,
}

pub fn modwt(x: &[f64], levels: usize) -> Result<ModwtDecomposition> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if levels == 0 || levels > max_level(n) {
        return Err(Error::InvalidArgument(format!(
            "{levels} levels requested; a series of length {n} allows 1..={}",
            max_level(n)
        )));
    }
    let mut v = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        let stride = (1usize << (j - 1)) % n;
        let mut w = vec![0.0; n];
        let mut next = vec![0.0; n];
        for t in 0..n {
            let lag = v[(t + n - stride) % n];
            w[t] = 0.5 * v[t] - 0.5 * lag;
            next[t] = 0.5 * v[t] + 0.5 * lag;
        }
        details.push(w);
        v = next;
    }
    Ok(ModwtDecomposition { details, smooth: v, levels })
}

/// Inverse pyramid from arbitrary coefficient sets of equal length.
fn inverse(details: &[Vec<f64>], smooth: &[f64]) -> Vec<f64> {
    let n = smooth.len();
    let mut v = smooth.to_vec();
    for j in (1..=details.len()).rev() {
        let stride = (1usize << (j - 1)) % n;
        let w = &details[j - 1];
        let mut prev = vec![0.0; n];
        for t in 0..n {
            let s = (t + stride) % n;
            prev[t] = 0.5 * (w[t] - w[s]) + 0.5 * (v[t] + v[s]);
        }
        v = prev;
    }
    v
}

pub fn imodwt(dec: &ModwtDecomposition) -> Vec<f64> {
    inverse(&dec.details, &dec.smooth)
}

/// Additive components `D_1..D_J` and `S_J`; they sum to the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mra {
    pub details: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
}

impl Mra {
    pub fn components(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.details.iter().chain(std::iter::once(&self.smooth))
    }

    pub fn component_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.details.len()).map(|j| format!("D{j}")).collect();
        names.push(format!("S{}", self.details.len()));
        names
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.smooth.len()];
        for c in self.components() {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v;
            }
        }
        out
    }

    /// One column per component.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let names = self.component_names();
        let mut header = vec!["t".to_string()];
        header.extend(names);
        wtr.write_record(&header)?;
        for t in 0..self.smooth.len() {
            let mut row = vec![t.to_string()];
            row.extend(self.components().map(|c| c[t].to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn mra(dec: &ModwtDecomposition) -> Mra {
    let n = dec.smooth.len();
    let zeros = vec![0.0; n];
    let details = (0..dec.levels)
        .map(|j| {
            let only: Vec<Vec<f64>> =
                (0..dec.levels).map(|i| if i == j { dec.details[i].clone() } else { zeros.clone() }).collect();
            inverse(&only, &zeros)
        })
        .collect();
    let smooth = inverse(&vec![zeros.clone(); dec.levels], &dec.smooth);
    Mra { details, smooth }
}

/// Reconstruction with the `drop_levels` finest detail levels removed.
pub fn denoise(dec: &ModwtDecomposition, drop_levels: usize) -> Result<Vec<f64>> {
    if drop_levels > dec.levels {
        return Err(Error::InvalidArgument(format!(
            "cannot drop {drop_levels} of {} levels",
            dec.levels
        )));
    }
    let n = dec.smooth.len();
    let details: Vec<Vec<f64>> = dec
        .details
        .iter()
        .enumerate()
        .map(|(i, w)| if i < drop_levels { vec![0.0; n] } else { w.clone() })
        .collect();
    Ok(inverse(&details, &dec.smooth))
}

/// Order cap for the per-component models.
pub const WBF_MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub name: String,
    pub fit: ArimaFit,
    /// Why the degenerate fallback model was used, if it was.
    pub fallback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WbfFit {
    pub levels: usize,
    pub n: usize,
    pub components: Vec<ComponentFit>,
}

fn fit_component(name: String, series: &[f64]) -> Result<ComponentFit> {
    let search = OrderSearch { max_p: WBF_MAX_ORDER, max_q: WBF_MAX_ORDER, d: Some(0) };
    let attempt = select_order_with(series, Transform::None, search)
        .and_then(|sel| fit_arima(series, sel.order, Transform::None));
    match attempt {
        Ok(fit) => Ok(ComponentFit { name, fit, fallback: None }),
        Err(err) => {
            let fit = fit_arima(series, ArimaOrder { p: 0, d: 0, q: 0 }, Transform::None)?;
            Ok(ComponentFit { name, fit, fallback: Some(err.to_string()) })
        }
    }
}

/// Decomposes with `J = decomposition_level(n)` and fits one ARIMA (d = 0,
/// p, q <= 3) to every MRA component.
pub fn wbf_fit(values: &[f64]) -> Result<WbfFit> {
    let n = values.len();
    let levels = decomposition_level(n)?;
    let parts = mra(&modwt(values, levels)?);
    let names = parts.component_names();
    let components = names
        .into_iter()
        .zip(parts.components())
        .map(|(name, series)| fit_component(name, series))
        .collect::<Result<Vec<_>>>()?;
    Ok(WbfFit { levels, n, components })
}

impl WbfFit {
    /// Per-component forecasts, details first, smooth last.
    pub fn component_forecasts(&self, h: usize) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.fit.forecast_raw(h)).collect()
    }

    /// Sum of component forecasts. Not clipped: residual series are signed.
    pub fn forecast(&self, h: usize) -> Result<Vec<f64>> {
        if h == 0 {
            return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
        }
        let mut out = vec![0.0; h];
        for f in self.component_forecasts(h) {
            for (o, v) in out.iter_mut().zip(f) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Sum of component one-step in-sample predictions.
    pub fn fitted_values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.fit.fitted_values()) {
                *o += v;
            }
        }
        out
    }

    pub fn fallbacks(&self) -> Vec<(&str, &str)> {
        self.components
            .iter()
            .filter_map(|c| c.fallback.as_deref().map(|why| (c.name.as_str(), why)))
            .collect()
    }
}

pub fn wbf_forecast(fit: &WbfFit, h: usize) -> Result<Vec<f64>> {
    fit.forecast(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_rule() {
        assert_eq!(decomposition_level(64).unwrap(), 4);
        assert_eq!(decomposition_level(76).unwrap(), 4);
        assert_eq!(decomposition_level(8).unwrap(), 2);
        assert!(decomposition_level(7).is_err());
    }

    #[test]
    fn constant_series_has_zero_details() {
        let dec = modwt(&[3.5; 16], 3).unwrap();
        assert!(dec.details.iter().flatten().all(|&w| w == 0.0));
        assert!(dec.smooth.iter().all(|&v| v == 3.5));
    }

    #[test]
    fn rejects_too_many_levels() {
        assert!(modwt(&[1.0; 16], 5).is_err());
        assert!(modwt(&[1.0; 16], 4).is_ok());
        assert!(modwt(&[1.0], 1).is_err());
    }

    #[test]
    fn alternating_spike_removed_by_first_level() {
        let x: Vec<f64> = (0..32).map(|t| 5.0 + if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let dec = modwt(&x, 3).unwrap();
        let clean = denoise(&dec, 1).unwrap();
        for v in clean {
            assert!((v - 5.0).abs() < 1e-6);
        }
    }

    #[test]
    fn denoise_extremes() {
        let x: Vec<f64> = (0..20).map(|t| (t as f64 * 0.7).sin() * 3.0 + t as f64).collect();
        let dec = modwt(&x, 2).unwrap();
        let same = denoise(&dec, 0).unwrap();
        for (a, b) in same.iter().zip(&x) {
            assert!((a - b).abs() < 1e-8);
        }
        let smooth_only = denoise(&dec, 2).unwrap();
        let parts = mra(&dec);
        for (a, b) in smooth_only.iter().zip(&parts.smooth) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(denoise(&dec, 3).is_err());
    }

    #[test]
    fn mra_components_sum_to_input() {
        let x: Vec<f64> = (0..40).map(|t| ((t * 31) % 17) as f64).collect();
        let parts = mra(&modwt(&x, 3).unwrap());
        for (a, b) in parts.reconstruct().iter().zip(&x) {
            assert!((a - b).abs() < 1e-8);
        }
        for d in &parts.details {
            let m = d.iter().sum::<f64>() / d.len() as f64;
            assert!(m.abs() < 1e-10);
        }
    }

    #[test]
    fn wbf_constant_and_zero_series() {
        let fit = wbf_fit(&[7.0; 30]).unwrap();
        assert_eq!(fit.levels, decomposition_level(30).unwrap());
        for v in fit.forecast(5).unwrap() {
            assert!((v - 7.0).abs() < 1e-6);
        }
        let zero = wbf_fit(&[0.0; 30]).unwrap();
        assert!(zero.forecast(4).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
}
