//! K-fold hyperparameter selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{train_lstm_classifier, train_mlp, ClassifierConfig};
use crate::error::{Error, Result};
use crate::lstm::{train_predictor_on, PredictorConfig};
use crate::series::Window;
use crate::TrainHistory;

/// Scores of every grid entry, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome<C> {
    pub grid: Vec<C>,
    /// `fold_scores[g][k]` is entry `g` validated on fold `k`.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean_scores: Vec<f64>,
    pub best_index: usize,
}

impl<C: Clone> CvOutcome<C> {
    pub fn best(&self) -> C {
        self.grid[self.best_index].clone()
    }
}

/// Seeded partition of `0..n` into `folds` groups whose sizes differ by at
/// most one.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidFolds(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::InvalidFolds(format!("{n} samples cannot fill {folds} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::new(); folds];
    for (pos, idx) in order.into_iter().enumerate() {
        out[pos % folds].push(idx);
    }
    Ok(out)
}

/// Evaluates `score(entry, train, valid)` on every fold and returns the
/// entry with the lowest mean score; ties go to the earlier entry. A
/// diverged fit scores `+inf`.
pub fn crossval_select<C, F>(
    samples: &[Window],
    grid: &[C],
    folds: usize,
    seed: u64,
    mut score: F,
) -> Result<CvOutcome<C>>
where
    C: Clone,
    F: FnMut(&C, &[Window], &[Window]) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let parts = fold_indices(samples.len(), folds, seed)?;
    let mut fold_scores = Vec::with_capacity(grid.len());
    for entry in grid {
        let mut scores = Vec::with_capacity(folds);
        for (k, held) in parts.iter().enumerate() {
            let valid: Vec<Window> = held.iter().map(|&i| samples[i].clone()).collect();
            let train: Vec<Window> = parts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .flat_map(|(_, p)| p.iter().map(|&i| samples[i].clone()))
                .collect();
            let s = match score(entry, &train, &valid) {
                Ok(s) if s.is_finite() => s,
                Ok(_) | Err(Error::DivergedTraining { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            scores.push(s);
        }
        fold_scores.push(scores);
    }
    let mean_scores: Vec<f64> = fold_scores
        .iter()
        .map(|s| {
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.iter().sum::<f64>() / sorted.len() as f64
        })
        .collect();
    let mut best_index = 0;
    for (g, &m) in mean_scores.iter().enumerate() {
        if m < mean_scores[best_index] {
            best_index = g;
        }
    }
    Ok(CvOutcome {
        grid: grid.to_vec(),
        fold_scores,
        mean_scores,
        best_index,
    })
}

fn snapshot_loss(history: &TrainHistory) -> f64 {
    history.best_valid_loss().unwrap_or(f64::INFINITY)
}

/// Every `(hidden, learning_rate)` pair, hidden-major, with `epochs` set.
pub fn predictor_grid(
    base: &PredictorConfig,
    hidden: &[usize],
    learning_rates: &[f64],
    epochs: usize,
) -> Vec<PredictorConfig> {
    hidden
        .iter()
        .flat_map(|&h| {
            learning_rates.iter().map(move |&lr| PredictorConfig {
                hidden: h,
                learning_rate: lr,
                epochs,
                ..*base
            })
        })
        .collect()
}

pub fn classifier_grid(
    base: &ClassifierConfig,
    hidden: &[usize],
    learning_rates: &[f64],
    epochs: usize,
) -> Vec<ClassifierConfig> {
    hidden
        .iter()
        .flat_map(|&h| {
            learning_rates.iter().map(move |&lr| ClassifierConfig {
                hidden: h,
                learning_rate: lr,
                epochs,
                ..*base
            })
        })
        .collect()
}

/// Selects predictor settings by validation prediction loss over folds of
/// normal training windows.
pub fn select_predictor(
    normal_train: &[Window],
    grid: &[PredictorConfig],
    folds: usize,
    seed: u64,
) -> Result<CvOutcome<PredictorConfig>> {
    crossval_select(normal_train, grid, folds, seed, |cfg, train, valid| {
        Ok(snapshot_loss(&train_predictor_on(train, valid, cfg)?.1))
    })
}

/// Selects LSTM classifier settings by validation cross-entropy.
pub fn select_lstm_classifier(
    labeled: &[Window],
    grid: &[ClassifierConfig],
    folds: usize,
    seed: u64,
) -> Result<CvOutcome<ClassifierConfig>> {
    crossval_select(labeled, grid, folds, seed, |cfg, train, valid| {
        Ok(snapshot_loss(&train_lstm_classifier(train, valid, cfg)?.1))
    })
}

/// Selects MLP settings by validation cross-entropy; only the learning
/// rate and regularization matter since the widths are fixed.
pub fn select_mlp(
    labeled: &[Window],
    grid: &[ClassifierConfig],
    folds: usize,
    seed: u64,
) -> Result<CvOutcome<ClassifierConfig>> {
    crossval_select(labeled, grid, folds, seed, |cfg, train, valid| {
        Ok(snapshot_loss(&train_mlp(train, valid, cfg)?.1))
    })
}
