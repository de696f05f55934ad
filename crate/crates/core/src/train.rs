//! The epoch loop shared by the predictor and both baselines: seeded
//! shuffling, per-sample Adagrad updates, validation after each epoch, and
//! retention of the lowest-validation-loss snapshot.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{AdagradState, Parameters, ADAGRAD_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: Option<usize>,
}

impl TrainHistory {
    pub fn best_valid_loss(&self) -> Option<f64> {
        let best = self.best_epoch?;
        self.records.iter().find(|r| r.epoch == best).map(|r| r.valid_loss)
    }

    /// `epoch,train_loss,valid_loss` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,valid_loss\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, r.valid_loss));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    /// Stop after this many epochs without a new best validation loss.
    pub patience: Option<usize>,
}

/// Runs the loop. `sample_grad(params, sample, dropout_seed)` returns the
/// data loss and its gradient for one sample in training mode;
/// `eval_loss(params, sample)` is the inference-mode data loss. When
/// `valid` is empty the training loss selects the snapshot.
pub(crate) fn fit<P, S, G, E>(
    init: P,
    train: &[S],
    valid: &[S],
    cfg: &LoopConfig,
    mut sample_grad: G,
    eval_loss: E,
) -> Result<(P, TrainHistory)>
where
    P: Parameters,
    S: Clone,
    G: FnMut(&P, &S, u64) -> Result<(f64, P)>,
    E: Fn(&P, &S) -> Result<f64>,
{
    if train.is_empty() {
        return Err(Error::EmptyDataset("no training samples".into()));
    }
    let mut params = init;
    let mut history = TrainHistory::default();
    if cfg.epochs == 0 {
        return Ok((params, history));
    }
    let mut opt = AdagradState::new(cfg.learning_rate, ADAGRAD_EPSILON)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, P)> = None;
    let mut since_best = 0usize;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &idx in &order {
            let dropout_seed: u64 = rng.random();
            let (loss, mut grads) = sample_grad(&params, &train[idx], dropout_seed)?;
            if !loss.is_finite() {
                return Err(Error::DivergedTraining { epoch });
            }
            total += loss;
            params.add_l2_grad(&mut grads, cfg.l2);
            opt.step(&mut params, &grads)?;
        }
        if !params.all_finite() {
            return Err(Error::DivergedTraining { epoch });
        }
        let train_loss = total / train.len() as f64;
        let valid_loss = if valid.is_empty() {
            train_loss
        } else {
            let mut sum = 0.0;
            for s in valid {
                sum += eval_loss(&params, s)?;
            }
            sum / valid.len() as f64
        };
        if !valid_loss.is_finite() {
            return Err(Error::DivergedTraining { epoch });
        }
        history.records.push(EpochRecord {
            epoch,
            train_loss,
            valid_loss,
        });
        if best.as_ref().is_none_or(|(b, _)| valid_loss < *b) {
            best = Some((valid_loss, params.clone()));
            history.best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    let (_, best_params) = best.expect("at least one epoch ran");
    Ok((best_params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ParamBlock, ParamKind};

    fn scalar(v: f64) -> ParamBlock {
        ParamBlock::from_values("p", ParamKind::Bias, 1, 1, vec![v]).unwrap()
    }

    fn quad_fit(epochs: usize, patience: Option<usize>) -> (ParamBlock, TrainHistory) {
        // minimise 0.5 (p - s)^2 over samples s
        let cfg = LoopConfig {
            learning_rate: 0.5,
            epochs,
            l2: 0.0,
            seed: 3,
            patience,
        };
        fit(
            scalar(0.0),
            &[1.0, 2.0, 3.0],
            &[2.0],
            &cfg,
            |p: &ParamBlock, s: &f64, _| {
                let d = p.values()[0] - s;
                Ok((0.5 * d * d, scalar(d)))
            },
            |p, s| Ok(0.5 * (p.values()[0] - s).powi(2)),
        )
        .unwrap()
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (p, h) = quad_fit(0, None);
        assert_eq!(p.values()[0], 0.0);
        assert!(h.records.is_empty());
    }

    #[test]
    fn keeps_best_snapshot() {
        let (p, h) = quad_fit(200, None);
        let min = h.records.iter().map(|r| r.valid_loss).fold(f64::INFINITY, f64::min);
        assert_eq!(h.best_valid_loss(), Some(min));
        assert!((0.5 * (p.values()[0] - 2.0).powi(2) - min).abs() < 1e-15);
        assert!(h.to_csv().starts_with("epoch,train_loss,valid_loss\n1,"));
    }

    #[test]
    fn patience_stops_early() {
        let (_, h) = quad_fit(10_000, Some(5));
        assert!(h.records.len() < 10_000);
    }

    #[test]
    fn non_finite_loss_aborts() {
        let cfg = LoopConfig {
            learning_rate: 0.1,
            epochs: 3,
            l2: 0.0,
            seed: 0,
            patience: None,
        };
        let r = fit(
            scalar(0.0),
            &[1.0],
            &[],
            &cfg,
            |_: &ParamBlock, _: &f64, _| Ok((f64::NAN, scalar(0.0))),
            |_, _| Ok(0.0),
        );
        assert!(matches!(r, Err(Error::DivergedTraining { epoch: 1 })));
    }
}
