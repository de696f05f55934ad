use serde::{Deserialize, Serialize};

use super::{label_u8, require_labels, ClassifierConfig, WindowClassifier};
use crate::error::Result;
use crate::lstm::{stack_backward, stack_forward, Mode, StackedLstmParams};
use crate::nn::{binary_cross_entropy, ParamBlock, Parameters};
use crate::series::Window;
use crate::train::{fit, TrainHistory};

/// Two stacked LSTM layers whose head, read at the final step, gives
/// `P(abnormal)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmClassifierParams {
    pub stack: StackedLstmParams,
}

impl LstmClassifierParams {
    pub fn init(hidden: usize, seed: u64) -> Self {
        Self {
            stack: StackedLstmParams::init(1, hidden, 1.0, seed),
        }
    }

    fn inputs(window: &Window) -> Vec<Vec<f64>> {
        window.points.iter().map(|&x| vec![x]).collect()
    }
}

impl Parameters for LstmClassifierParams {
    fn blocks(&self) -> Vec<&ParamBlock> {
        self.stack.blocks()
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock> {
        self.stack.blocks_mut()
    }
}

impl WindowClassifier for LstmClassifierParams {
    fn probability(&self, window: &Window) -> Result<f64> {
        let cache = stack_forward(&self.stack, &Self::inputs(window), Mode::Infer)?;
        Ok(cache.outputs[cache.steps() - 1])
    }
}

/// Cross-entropy of the final-step output in inference mode.
pub fn lstm_classifier_loss(params: &LstmClassifierParams, window: &Window) -> Result<f64> {
    Ok(binary_cross_entropy(params.probability(window)?, label_u8(window)?).0)
}

/// Loss and gradient for one labeled window.
pub fn lstm_classifier_grad(
    params: &LstmClassifierParams,
    window: &Window,
    mode: Mode,
) -> Result<(f64, LstmClassifierParams)> {
    let cache = stack_forward(&params.stack, &LstmClassifierParams::inputs(window), mode)?;
    let steps = cache.steps();
    let (loss, d_prob) = binary_cross_entropy(cache.outputs[steps - 1], label_u8(window)?);
    let mut d_out = vec![0.0; steps];
    d_out[steps - 1] = d_prob;
    let stack = stack_backward(&params.stack, &cache, &d_out)?;
    Ok((loss, LstmClassifierParams { stack }))
}

pub fn train_lstm_classifier(
    train: &[Window],
    valid: &[Window],
    config: &ClassifierConfig,
) -> Result<(LstmClassifierParams, TrainHistory)> {
    config.validate()?;
    require_labels(train)?;
    fit(
        LstmClassifierParams::init(config.hidden, config.seed),
        train,
        valid,
        &config.loop_config(),
        |p, w, seed| {
            lstm_classifier_grad(
                p,
                w,
                Mode::Train {
                    dropout: config.dropout,
                    seed,
                },
            )
        },
        lstm_classifier_loss,
    )
}
