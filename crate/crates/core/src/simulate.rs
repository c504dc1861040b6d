//! Gaussian ARMA / ARIMA simulation, using the same sign convention as
//! [`crate::arima`] (`e_t - theta_1 e_{t-1} - ...`).

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::series::inverse_difference;

const BURN_IN: usize = 200;

pub fn arma<R: Rng + ?Sized>(
    rng: &mut R,
    phi: &[f64],
    theta: &[f64],
    intercept: f64,
    sigma: f64,
    n: usize,
) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let total = n + BURN_IN;
    let mut x = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        e[t] = normal.sample(rng);
        let mut v = intercept + e[t];
        for (i, ph) in phi.iter().enumerate() {
            if t > i {
                v += ph * x[t - i - 1];
            }
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                v -= th * e[t - j - 1];
            }
        }
        x[t] = v;
    }
    x.split_off(BURN_IN)
}

/// ARMA innovations integrated `d` times from zero initial values plus `level`.
pub fn arima<R: Rng + ?Sized>(
    rng: &mut R,
    phi: &[f64],
    theta: &[f64],
    d: usize,
    sigma: f64,
    n: usize,
    level: f64,
) -> Vec<f64> {
    let w = arma(rng, phi, theta, 0.0, sigma, n - d);
    let anchors = vec![level; d];
    inverse_difference(&w, &anchors, d).expect("anchor count equals d")
}

/// Independent standard-normal draws scaled by `sigma`.
pub fn white_noise<R: Rng + ?Sized>(rng: &mut R, sigma: f64, n: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    (0..n).map(|_| normal.sample(rng)).collect()
}
