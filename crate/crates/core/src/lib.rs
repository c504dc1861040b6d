//! Short-horizon forecasting of daily epidemic case counts with a two-stage
//! ARIMA plus wavelet model, and regression-tree risk modelling of
//! country-level case-fatality rates.

pub mod arima;
pub mod cart;
pub mod cfr;
pub mod error;
pub mod hybrid;
pub mod metrics;
pub mod optim;
pub mod series;
pub mod simulate;
pub mod stationarity;
pub mod wavelet;

pub use error::{Error, Result};
