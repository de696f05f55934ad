use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{label_u8, require_labels, ClassifierConfig, WindowClassifier};
use crate::error::{Error, Result};
use crate::lstm::Mode;
use crate::nn::{binary_cross_entropy, fill_dropout_mask, sigmoid, ParamBlock, ParamKind, Parameters};
use crate::series::Window;
use crate::train::{fit, TrainHistory};

/// Hidden widths of the perceptron.
pub const MLP_HIDDEN: [usize; 3] = [10, 20, 10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `out x in`
    pub w: ParamBlock,
    /// `out x 1`
    pub b: ParamBlock,
}

/// Dense `input -> 10 -> 20 -> 10 -> 1`, tanh hidden units, sigmoid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
}

impl MlpParams {
    fn widths(input: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(MLP_HIDDEN);
        w.push(1);
        w
    }

    pub fn zeros(input: usize) -> Self {
        let widths = Self::widths(input);
        Self {
            layers: widths
                .windows(2)
                .enumerate()
                .map(|(k, io)| DenseLayer {
                    w: ParamBlock::zeros(format!("dense{k}.w"), ParamKind::Weight, io[1], io[0]),
                    b: ParamBlock::zeros(format!("dense{k}.b"), ParamKind::Bias, io[1], 1),
                })
                .collect(),
        }
    }

    pub fn init(input: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let widths = Self::widths(input);
        Self {
            layers: widths
                .windows(2)
                .enumerate()
                .map(|(k, io)| DenseLayer {
                    w: ParamBlock::uniform(
                        format!("dense{k}.w"),
                        ParamKind::Weight,
                        io[1],
                        io[0],
                        io[0],
                        &mut rng,
                    ),
                    b: ParamBlock::zeros(format!("dense{k}.b"), ParamKind::Bias, io[1], 1),
                })
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let widths: Vec<usize> = self.layers.iter().map(|l| l.w.rows()).collect();
        if widths.len() != 4 || widths[..3] != MLP_HIDDEN || widths[3] != 1 {
            return Err(Error::Shape(format!("mlp widths {widths:?}")));
        }
        for pair in self.layers.windows(2) {
            if pair[1].w.cols() != pair[0].w.rows() {
                return Err(Error::Shape("mlp layers do not chain".into()));
            }
        }
        if self.layers.iter().any(|l| l.b.shape() != (l.w.rows(), 1)) {
            return Err(Error::Shape("mlp bias shape".into()));
        }
        Ok(())
    }

    /// Returns the output probability plus per-layer inputs (post-mask) and
    /// masks for the backward pass.
    fn forward(&self, x: &[f64], mode: Mode) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "mlp input of length {} for a model expecting {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut rng = match mode {
            Mode::Train { dropout, seed } if dropout > 0.0 => {
                Some((dropout, ChaCha8Rng::seed_from_u64(seed)))
            }
            _ => None,
        };
        let mut acts = vec![x.to_vec()];
        let mut masks = Vec::new();
        let last = self.layers.len() - 1;
        let mut out = 0.0;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = layer.b.values().to_vec();
            layer.w.matvec_acc(&acts[k], &mut z);
            if k == last {
                out = sigmoid(z[0]);
            } else {
                let mut mask = vec![1.0; z.len()];
                if let Some((rate, rng)) = rng.as_mut() {
                    fill_dropout_mask(&mut mask, *rate, rng)?;
                }
                let a = z.iter().zip(&mask).map(|(v, m)| v.tanh() * m).collect();
                masks.push(mask);
                acts.push(a);
            }
        }
        Ok((out, acts, masks))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x, Mode::Infer)?.0)
    }
}

impl Parameters for MlpParams {
    fn blocks(&self) -> Vec<&ParamBlock> {
        self.layers.iter().flat_map(|l| [&l.w, &l.b]).collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock> {
        self.layers.iter_mut().flat_map(|l| [&mut l.w, &mut l.b]).collect()
    }
}

impl WindowClassifier for MlpParams {
    fn probability(&self, window: &Window) -> Result<f64> {
        self.predict(&window.points)
    }
}

pub fn mlp_loss(params: &MlpParams, window: &Window) -> Result<f64> {
    Ok(binary_cross_entropy(params.predict(&window.points)?, label_u8(window)?).0)
}

/// Cross-entropy and its gradient for one labeled window.
pub fn mlp_grad(params: &MlpParams, window: &Window, mode: Mode) -> Result<(f64, MlpParams)> {
    let (prob, acts, masks) = params.forward(&window.points, mode)?;
    let (loss, d_prob) = binary_cross_entropy(prob, label_u8(window)?);
    let mut grads = params.zeros_like();
    let last = params.layers.len() - 1;
    let mut delta = vec![d_prob * prob * (1.0 - prob)];
    for k in (0..=last).rev() {
        grads.layers[k].w.outer_acc(&delta, &acts[k]);
        grads.layers[k].b.add_vec(&delta);
        if k == 0 {
            break;
        }
        let mut d_act = vec![0.0; acts[k].len()];
        params.layers[k].w.matvec_t_acc(&delta, &mut d_act);
        // acts[k] = tanh(z) * mask, so d z = d_act * mask * (1 - tanh^2)
        delta = d_act
            .iter()
            .zip(&acts[k])
            .zip(&masks[k - 1])
            .map(|((d, a), m)| {
                if *m == 0.0 {
                    0.0
                } else {
                    let t = a / m;
                    d * m * (1.0 - t * t)
                }
            })
            .collect();
    }
    Ok((loss, grads))
}

pub fn train_mlp(
    train: &[Window],
    valid: &[Window],
    config: &ClassifierConfig,
) -> Result<(MlpParams, TrainHistory)> {
    config.validate()?;
    require_labels(train)?;
    let input = train[0].len();
    if let Some(w) = train.iter().chain(valid).find(|w| w.len() != input) {
        return Err(Error::Shape(format!(
            "mlp windows must share a length: {} vs {input}",
            w.len()
        )));
    }
    fit(
        MlpParams::init(input, config.seed),
        train,
        valid,
        &config.loop_config(),
        |p, w, seed| {
            mlp_grad(
                p,
                w,
                Mode::Train {
                    dropout: config.dropout,
                    seed,
                },
            )
        },
        mlp_loss,
    )
}
