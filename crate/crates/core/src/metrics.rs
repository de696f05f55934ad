//! Confusion counts and point metrics with abnormal as the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Abnormal, Label::Abnormal) => self.tp += 1,
            (Label::Normal, Label::Abnormal) => self.fp += 1,
            (Label::Normal, Label::Normal) => self.tn += 1,
            (Label::Abnormal, Label::Normal) => self.fn_ += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
}

pub fn confusion(truth: &[Label], predicted: &[Label]) -> Result<ConfusionCounts> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} truth labels vs {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        c.record(t, p);
    }
    Ok(c)
}

/// `(1 + b^2) P R / (b^2 P + R)`, zero when both P and R are zero.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    Ok(if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    })
}

pub fn compute_metrics(counts: &ConfusionCounts, beta: f64) -> Result<MetricReport> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyDataset("no evaluated samples".into()));
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    Ok(MetricReport {
        accuracy: ratio(counts.tp + counts.tn, total),
        precision,
        recall,
        f_beta: f_beta(precision, recall, beta)?,
        beta,
    })
}
