//! The two supervised comparison models: a stacked-LSTM sequence
//! classifier and a 10-20-10 multilayer perceptron. Both read the same
//! normalized windows as the detector and are trained with cross-entropy.

mod lstm_classifier;
mod mlp;

use serde::{Deserialize, Serialize};

pub use lstm_classifier::{
    lstm_classifier_grad, lstm_classifier_loss, train_lstm_classifier, LstmClassifierParams,
};
pub use mlp::{mlp_grad, mlp_loss, train_mlp, MlpParams, MLP_HIDDEN};

use crate::error::{Error, Result};
use crate::series::{Label, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// LSTM width per layer; the MLP widths are fixed.
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub l2: f64,
    pub seed: u64,
    pub patience: Option<usize>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden: 32,
            learning_rate: 0.05,
            epochs: 1000,
            dropout: 0.1,
            l2: 1e-4,
            seed: 0,
            patience: None,
        }
    }
}

impl ClassifierConfig {
    pub(crate) fn loop_config(&self) -> crate::train::LoopConfig {
        crate::train::LoopConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            l2: self.l2,
            seed: self.seed,
            patience: self.patience,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidRate(self.dropout));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden size must be positive".into()));
        }
        Ok(())
    }
}

/// A trained window-level classifier that outputs `P(abnormal)`.
pub trait WindowClassifier {
    fn probability(&self, window: &Window) -> Result<f64>;

    /// Abnormal iff the probability is at least 0.5.
    fn classify_window(&self, window: &Window) -> Result<(Label, f64)> {
        let p = self.probability(window)?;
        Ok((label_for(p), p))
    }
}

pub fn label_for(probability: f64) -> Label {
    if probability >= 0.5 {
        Label::Abnormal
    } else {
        Label::Normal
    }
}

pub(crate) fn require_labels(windows: &[Window]) -> Result<()> {
    let mut seen = [false; 2];
    for w in windows {
        let l = w.label.ok_or_else(|| {
            Error::Config(format!("window at offset {} has no label", w.source_offset))
        })?;
        seen[l as usize] = true;
    }
    for c in [0u8, 1] {
        if !seen[c as usize] {
            return Err(Error::MissingClass(c));
        }
    }
    Ok(())
}

pub(crate) fn label_u8(window: &Window) -> Result<u8> {
    window
        .label
        .map(Label::as_u8)
        .ok_or_else(|| Error::Config(format!("window at offset {} has no label", window.source_offset)))
}
