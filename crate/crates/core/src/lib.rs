//! Anomaly detection for sensor time series from the prediction errors of a
//! stacked LSTM.
//!
//! A two-layer LSTM is trained on normal windows only to predict each next
//! point. Its per-step prediction errors on held-out windows become feature
//! vectors for a Gaussian naive Bayes classifier that labels each window
//! normal or abnormal. Two supervised baselines (an LSTM sequence
//! classifier and an MLP), synthetic data generators and an end-to-end
//! experiment runner are included.

pub mod baselines;
pub mod bayes;
pub mod error;
pub mod lstm;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod series;
pub mod synth;
mod train;

pub use error::{Error, Result};
pub use train::{EpochRecord, LoopConfig, TrainHistory};
