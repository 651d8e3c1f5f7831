//! Household PV + battery dispatch under a two-rate tariff, with a
//! from-scratch LSTM for day-ahead load and PV forecasting.

// `!(x > 0.0)` is used on purpose so NaN fails validation; numeric kernels
// index several arrays with one loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod battery;
pub mod cli;
pub mod config;
pub mod cost;
pub mod dispatch;
pub mod forecast;
pub mod metrics;
pub mod predictive;
pub mod series;
pub mod synth;
pub mod tariff;
