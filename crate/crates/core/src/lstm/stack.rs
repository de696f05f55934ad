use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cell::{step_backward, step_unchecked, CellState, LstmCellParams, StepCache};
use crate::error::{Error, Result};
use crate::nn::{fill_dropout_mask, sigmoid, ParamBlock, ParamKind, Parameters};

/// Two stacked LSTM layers and a dense sigmoid head that emits one scalar
/// per time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedLstmParams {
    pub layer1: LstmCellParams,
    pub layer2: LstmCellParams,
    /// `1 x H2`
    pub head_w: ParamBlock,
    /// `1 x 1`
    pub head_b: ParamBlock,
}

impl StackedLstmParams {
    pub fn zeros(input: usize, hidden1: usize, hidden2: usize) -> Self {
        Self {
            layer1: LstmCellParams::zeros("layer1", input, hidden1),
            layer2: LstmCellParams::zeros("layer2", hidden1, hidden2),
            head_w: ParamBlock::zeros("head.w", ParamKind::Weight, 1, hidden2),
            head_b: ParamBlock::zeros("head.b", ParamKind::Bias, 1, 1),
        }
    }

    pub fn init(input: usize, hidden: usize, forget_bias: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            layer1: LstmCellParams::init("layer1", input, hidden, forget_bias, &mut rng),
            layer2: LstmCellParams::init("layer2", hidden, hidden, forget_bias, &mut rng),
            head_w: ParamBlock::uniform("head.w", ParamKind::Weight, 1, hidden, hidden, &mut rng),
            head_b: ParamBlock::zeros("head.b", ParamKind::Bias, 1, 1),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer1.input_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.layer1.validate()?;
        self.layer2.validate()?;
        if self.layer2.input_dim() != self.layer1.hidden_dim() {
            return Err(Error::Shape(format!(
                "layer2 input {} != layer1 hidden {}",
                self.layer2.input_dim(),
                self.layer1.hidden_dim()
            )));
        }
        if self.head_w.shape() != (1, self.layer2.hidden_dim()) || self.head_b.shape() != (1, 1) {
            return Err(Error::Shape("output head does not match layer2".into()));
        }
        Ok(())
    }

    /// Order-sensitive digest of every parameter bit, used to detect a cache
    /// that was produced by different weights.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.blocks() {
            for v in b.values() {
                h ^= v.to_bits();
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

impl Parameters for StackedLstmParams {
    fn blocks(&self) -> Vec<&ParamBlock> {
        let mut v = self.layer1.blocks();
        v.extend(self.layer2.blocks());
        v.push(&self.head_w);
        v.push(&self.head_b);
        v
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock> {
        let mut v = self.layer1.blocks_mut();
        v.extend(self.layer2.blocks_mut());
        v.push(&mut self.head_w);
        v.push(&mut self.head_b);
        v
    }
}

/// Training draws fresh dropout masks on every non-recurrent connection;
/// inference is deterministic and mask-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Train { dropout: f64, seed: u64 },
    Infer,
}

/// Per-step activations of a full forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Vec<Vec<f64>>,
    pub layer1: Vec<StepCache>,
    pub layer2: Vec<StepCache>,
    /// Hidden outputs of layer 2, before the head mask.
    pub h2: Vec<Vec<f64>>,
    pub mask_input: Vec<Vec<f64>>,
    pub mask_between: Vec<Vec<f64>>,
    pub mask_head: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
    pub params_fingerprint: u64,
}

impl ForwardCache {
    pub fn steps(&self) -> usize {
        self.outputs.len()
    }
}

/// One mask per window, shared by every step.
fn masks(len: usize, steps: usize, rate: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let mut m = vec![1.0; len];
    if rate > 0.0 {
        fill_dropout_mask(&mut m, rate, rng)?;
    }
    Ok(vec![m; steps])
}

/// Runs both layers over `inputs` (one vector per step) and the head at
/// every step. The output at step `t` depends on inputs `0..=t` only.
pub fn stack_forward(
    params: &StackedLstmParams,
    inputs: &[Vec<f64>],
    mode: Mode,
) -> Result<ForwardCache> {
    params.validate()?;
    let steps = inputs.len();
    if steps == 0 {
        return Err(Error::InvalidWindow("empty input sequence".into()));
    }
    if let Some(bad) = inputs.iter().find(|x| x.len() != params.input_dim()) {
        return Err(Error::Shape(format!(
            "input of dim {} for a network expecting {}",
            bad.len(),
            params.input_dim()
        )));
    }
    let h1 = params.layer1.hidden_dim();
    let h2 = params.layer2.hidden_dim();
    let (mask_input, mask_between, mask_head) = match mode {
        Mode::Train { dropout, seed } if dropout > 0.0 => {
            if !(0.0..1.0).contains(&dropout) {
                return Err(Error::InvalidRate(dropout));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                masks(params.input_dim(), steps, dropout, &mut rng)?,
                masks(h1, steps, dropout, &mut rng)?,
                masks(h2, steps, dropout, &mut rng)?,
            )
        }
        Mode::Train { dropout, .. } if dropout < 0.0 => return Err(Error::InvalidRate(dropout)),
        _ => (
            vec![vec![1.0; params.input_dim()]; steps],
            vec![vec![1.0; h1]; steps],
            vec![vec![1.0; h2]; steps],
        ),
    };

    let mut s1 = CellState::zeros(h1);
    let mut s2 = CellState::zeros(h2);
    let mut layer1 = Vec::with_capacity(steps);
    let mut layer2 = Vec::with_capacity(steps);
    let mut h2s = Vec::with_capacity(steps);
    let mut outputs = Vec::with_capacity(steps);
    let head_b = params.head_b.values()[0];
    for t in 0..steps {
        let x: Vec<f64> = inputs[t].iter().zip(&mask_input[t]).map(|(a, m)| a * m).collect();
        let (n1, c1) = step_unchecked(&x, &s1, &params.layer1);
        let x2: Vec<f64> = n1.h.iter().zip(&mask_between[t]).map(|(a, m)| a * m).collect();
        let (n2, c2) = step_unchecked(&x2, &s2, &params.layer2);
        let pre: f64 = params
            .head_w
            .values()
            .iter()
            .zip(&n2.h)
            .zip(&mask_head[t])
            .map(|((w, h), m)| w * h * m)
            .sum::<f64>()
            + head_b;
        outputs.push(sigmoid(pre));
        h2s.push(n2.h.clone());
        layer1.push(c1);
        layer2.push(c2);
        s1 = n1;
        s2 = n2;
    }
    Ok(ForwardCache {
        inputs: inputs.to_vec(),
        layer1,
        layer2,
        h2: h2s,
        mask_input,
        mask_between,
        mask_head,
        outputs,
        params_fingerprint: params.fingerprint(),
    })
}

/// Backpropagation through time. `d_outputs[t]` is the loss gradient with
/// respect to the head output at step `t`; the returned value holds the
/// gradient of every parameter block.
pub fn stack_backward(
    params: &StackedLstmParams,
    cache: &ForwardCache,
    d_outputs: &[f64],
) -> Result<StackedLstmParams> {
    if cache.params_fingerprint != params.fingerprint() {
        return Err(Error::CacheMismatch("parameters changed since the forward pass".into()));
    }
    let steps = cache.steps();
    if d_outputs.len() != steps {
        return Err(Error::CacheMismatch(format!(
            "{} output gradients for a {steps}-step cache",
            d_outputs.len()
        )));
    }
    let h1 = params.layer1.hidden_dim();
    let h2 = params.layer2.hidden_dim();
    let mut grads = params.zeros_like();

    // head and layer 2, newest step first
    let mut d_from_above = vec![vec![0.0; h1]; steps];
    let mut dh_next = vec![0.0; h2];
    let mut dc_next = vec![0.0; h2];
    for t in (0..steps).rev() {
        let y = cache.outputs[t];
        let da = d_outputs[t] * y * (1.0 - y);
        let mut dh = dh_next.clone();
        if da != 0.0 {
            let hw = params.head_w.values();
            let gw = grads.head_w.values_mut();
            for j in 0..h2 {
                let m = cache.mask_head[t][j];
                gw[j] += da * cache.h2[t][j] * m;
                dh[j] += da * hw[j] * m;
            }
            grads.head_b.values_mut()[0] += da;
        }
        let (dx, dh_prev, dc_prev) =
            step_backward(&params.layer2, &cache.layer2[t], &dh, &dc_next, &mut grads.layer2);
        for j in 0..h1 {
            d_from_above[t][j] = dx[j] * cache.mask_between[t][j];
        }
        dh_next = dh_prev;
        dc_next = dc_prev;
    }

    let mut dh_next = vec![0.0; h1];
    let mut dc_next = vec![0.0; h1];
    for t in (0..steps).rev() {
        let dh: Vec<f64> = dh_next.iter().zip(&d_from_above[t]).map(|(a, b)| a + b).collect();
        let (_, dh_prev, dc_prev) =
            step_backward(&params.layer1, &cache.layer1[t], &dh, &dc_next, &mut grads.layer1);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    Ok(grads)
}
