use serde::{Deserialize, Serialize};

use super::stack::{stack_backward, stack_forward, ForwardCache, Mode, StackedLstmParams};
use crate::error::{Error, Result};
use crate::nn::{mse_final_step, Parameters};
use crate::series::{DatasetSplit, Label, Window};
use crate::train::{fit, LoopConfig, TrainHistory};

/// Hyperparameters of the one-step-ahead predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub l2: f64,
    pub seed: u64,
    pub forget_bias: f64,
    pub patience: Option<usize>,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self {
            hidden: 32,
            learning_rate: 0.05,
            epochs: 1000,
            dropout: 0.1,
            l2: 1e-4,
            seed: 0,
            forget_bias: 1.0,
            patience: None,
        }
    }
}

impl PredictorConfig {
    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
            seed: self.seed,
            patience: self.patience,
        }
    }

    pub fn init_params(&self) -> StackedLstmParams {
        StackedLstmParams::init(1, self.hidden, self.forget_bias, self.seed)
    }
}

/// Per-step prediction errors of one window: `errors[t] = x[t+1] - pred[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorVector {
    pub errors: Vec<f64>,
    pub label: Option<Label>,
    pub window_id: usize,
}

impl ErrorVector {
    pub fn dim(&self) -> usize {
        self.errors.len()
    }
}

fn inputs_of(window: &Window) -> Result<Vec<Vec<f64>>> {
    if window.len() < 2 {
        return Err(Error::InvalidWindow(format!(
            "window of length {} cannot be predicted",
            window.len()
        )));
    }
    Ok(window.points[..window.len() - 1].iter().map(|&x| vec![x]).collect())
}

/// One-step-ahead predictions for points `1..T` of the window, from the
/// points before each.
pub fn forward(
    params: &StackedLstmParams,
    window: &Window,
    mode: Mode,
) -> Result<(Vec<f64>, ForwardCache)> {
    let cache = stack_forward(params, &inputs_of(window)?, mode)?;
    Ok((cache.outputs.clone(), cache))
}

/// Gradient of the final-step squared error plus `l2/2 * sum |W|^2`.
/// Returns `(data loss, gradients)`.
pub fn bptt_backward(
    cache: &ForwardCache,
    window: &Window,
    params: &StackedLstmParams,
    l2: f64,
) -> Result<(f64, StackedLstmParams)> {
    let steps = window.len().saturating_sub(1);
    if cache.steps() != steps || cache.inputs.iter().zip(&window.points).any(|(x, p)| x[0] != *p)
    {
        return Err(Error::CacheMismatch("cache was built from a different window".into()));
    }
    let (loss, d_last) = mse_final_step(cache.outputs[steps - 1], window.points[steps]);
    let mut d_out = vec![0.0; steps];
    d_out[steps - 1] = d_last;
    let mut grads = stack_backward(params, cache, &d_out)?;
    params.add_l2_grad(&mut grads, l2);
    Ok((loss, grads))
}

/// Final-step loss in inference mode.
pub fn final_step_loss(params: &StackedLstmParams, window: &Window) -> Result<f64> {
    let (pred, _) = forward(params, window, Mode::Infer)?;
    Ok(mse_final_step(pred[pred.len() - 1], window.points[window.len() - 1]).0)
}

/// Trains on `normal_train`, selecting the snapshot with the lowest
/// validation loss on `normal_valid`.
pub fn train_predictor(
    split: &DatasetSplit,
    config: &PredictorConfig,
) -> Result<(StackedLstmParams, TrainHistory)> {
    train_predictor_on(&split.normal_train, &split.normal_valid, config)
}

pub fn train_predictor_on(
    train: &[Window],
    valid: &[Window],
    config: &PredictorConfig,
) -> Result<(StackedLstmParams, TrainHistory)> {
    if train.is_empty() {
        return Err(Error::EmptyDataset("predictor needs normal training windows".into()));
    }
    if config.hidden == 0 {
        return Err(Error::Config("hidden size must be positive".into()));
    }
    if !(0.0..1.0).contains(&config.dropout) {
        return Err(Error::InvalidRate(config.dropout));
    }
    fit(
        config.init_params(),
        train,
        valid,
        &config.loop_config(),
        |p, w, seed| {
            let (_, cache) = forward(
                p,
                w,
                Mode::Train {
                    dropout: config.dropout,
                    seed,
                },
            )?;
            bptt_backward(&cache, w, p, 0.0)
        },
        final_step_loss,
    )
}

pub fn prediction_errors(params: &StackedLstmParams, window: &Window) -> Result<ErrorVector> {
    let (pred, _) = forward(params, window, Mode::Infer)?;
    Ok(ErrorVector {
        errors: pred
            .iter()
            .zip(&window.points[1..])
            .map(|(p, x)| x - p)
            .collect(),
        label: window.label,
        window_id: window.source_offset,
    })
}
