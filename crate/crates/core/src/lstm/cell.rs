use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{sigmoid, ParamBlock, ParamKind, Parameters};

/// Gate order inside the fused weight blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Candidate = 3,
}

/// Weights of one LSTM layer with the four gates fused row-wise: rows
/// `[k*H, (k+1)*H)` of each block belong to gate `k` in [`Gate`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    /// Input weights, `4H x I`.
    pub w: ParamBlock,
    /// Recurrent weights, `4H x H`.
    pub u: ParamBlock,
    /// Biases, `4H x 1`.
    pub b: ParamBlock,
}

impl LstmCellParams {
    pub fn zeros(prefix: &str, input: usize, hidden: usize) -> Self {
        Self {
            w: ParamBlock::zeros(format!("{prefix}.w"), ParamKind::Weight, 4 * hidden, input),
            u: ParamBlock::zeros(format!("{prefix}.u"), ParamKind::Weight, 4 * hidden, hidden),
            b: ParamBlock::zeros(format!("{prefix}.b"), ParamKind::Bias, 4 * hidden, 1),
        }
    }

    /// Uniform weights scaled by fan-in; zero biases except the forget gate.
    pub fn init<R: Rng>(
        prefix: &str,
        input: usize,
        hidden: usize,
        forget_bias: f64,
        rng: &mut R,
    ) -> Self {
        let mut p = Self {
            w: ParamBlock::uniform(format!("{prefix}.w"), ParamKind::Weight, 4 * hidden, input, input, rng),
            u: ParamBlock::uniform(format!("{prefix}.u"), ParamKind::Weight, 4 * hidden, hidden, hidden, rng),
            b: ParamBlock::zeros(format!("{prefix}.b"), ParamKind::Bias, 4 * hidden, 1),
        };
        p.gate_bias_mut(Gate::Forget).iter_mut().for_each(|v| *v = forget_bias);
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.cols()
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden_dim();
        let k = gate as usize;
        &mut self.b.values_mut()[k * h..(k + 1) * h]
    }

    /// Input weights of one gate, `H x I` row-major.
    pub fn gate_input_weights(&self, gate: Gate) -> &[f64] {
        let h = self.hidden_dim();
        let k = gate as usize;
        &self.w.values()[k * h * self.input_dim()..(k + 1) * h * self.input_dim()]
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_dim();
        if h == 0 || self.input_dim() == 0 {
            return Err(Error::Shape("lstm layer has a zero dimension".into()));
        }
        if self.w.rows() != 4 * h || self.u.rows() != 4 * h || self.u.cols() != h {
            return Err(Error::Shape(format!(
                "lstm gates disagree: w {:?}, u {:?} for hidden {h}",
                self.w.shape(),
                self.u.shape()
            )));
        }
        if self.b.shape() != (4 * h, 1) {
            return Err(Error::Shape(format!("lstm bias shape {:?}", self.b.shape())));
        }
        Ok(())
    }
}

impl Parameters for LstmCellParams {
    fn blocks(&self) -> Vec<&ParamBlock> {
        vec![&self.w, &self.u, &self.b]
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock> {
        vec![&mut self.w, &mut self.u, &mut self.b]
    }
}

/// Hidden output `h` and memory `c` of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Everything one step needs for its backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One LSTM step:
/// `i,f,o = sigmoid(W x + U h + b)`, `g = tanh(W x + U h + b)`,
/// `c = f*c_prev + i*g`, `h = o*tanh(c)`.
pub fn lstm_cell_step(
    x: &[f64],
    prev: &CellState,
    params: &LstmCellParams,
) -> Result<(CellState, StepCache)> {
    let h = params.hidden_dim();
    if x.len() != params.input_dim() || prev.h.len() != h || prev.c.len() != h {
        return Err(Error::Shape(format!(
            "lstm step: input {} (expects {}), state {}/{} (expects {h})",
            x.len(),
            params.input_dim(),
            prev.h.len(),
            prev.c.len()
        )));
    }
    Ok(step_unchecked(x, prev, params))
}

pub(crate) fn step_unchecked(
    x: &[f64],
    prev: &CellState,
    params: &LstmCellParams,
) -> (CellState, StepCache) {
    let h = params.hidden_dim();
    let mut z = params.b.values().to_vec();
    params.w.matvec_acc(x, &mut z);
    params.u.matvec_acc(&prev.h, &mut z);

    let i: Vec<f64> = z[..h].iter().map(|&v| sigmoid(v)).collect();
    let f: Vec<f64> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
    let o: Vec<f64> = z[2 * h..3 * h].iter().map(|&v| sigmoid(v)).collect();
    let g: Vec<f64> = z[3 * h..].iter().map(|&v| v.tanh()).collect();

    let mut c = vec![0.0; h];
    let mut tanh_c = vec![0.0; h];
    let mut h_out = vec![0.0; h];
    for j in 0..h {
        c[j] = f[j] * prev.c[j] + i[j] * g[j];
        tanh_c[j] = c[j].tanh();
        h_out[j] = o[j] * tanh_c[j];
    }
    let cache = StepCache {
        x: x.to_vec(),
        h_prev: prev.h.clone(),
        c_prev: prev.c.clone(),
        i,
        f,
        o,
        g,
        c: c.clone(),
        tanh_c,
    };
    (CellState { h: h_out, c }, cache)
}

/// Backward through one step. `dh` and `dc` are the total gradients
/// arriving at this step's `h` and `c`; gradients of the step's weights
/// are accumulated into `grads`. Returns `(dx, dh_prev, dc_prev)`.
pub(crate) fn step_backward(
    params: &LstmCellParams,
    cache: &StepCache,
    dh: &[f64],
    dc: &[f64],
    grads: &mut LstmCellParams,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = params.hidden_dim();
    let mut dz = vec![0.0; 4 * h];
    let mut dc_prev = vec![0.0; h];
    for j in 0..h {
        let (i, f, o, g, tc) = (cache.i[j], cache.f[j], cache.o[j], cache.g[j], cache.tanh_c[j]);
        let d_o = dh[j] * tc;
        let d_c = dc[j] + dh[j] * o * (1.0 - tc * tc);
        let d_i = d_c * g;
        let d_g = d_c * i;
        let d_f = d_c * cache.c_prev[j];
        dc_prev[j] = d_c * f;
        dz[j] = d_i * i * (1.0 - i);
        dz[h + j] = d_f * f * (1.0 - f);
        dz[2 * h + j] = d_o * o * (1.0 - o);
        dz[3 * h + j] = d_g * (1.0 - g * g);
    }
    grads.w.outer_acc(&dz, &cache.x);
    grads.u.outer_acc(&dz, &cache.h_prev);
    grads.b.add_vec(&dz);

    let mut dx = vec![0.0; params.input_dim()];
    params.w.matvec_t_acc(&dz, &mut dx);
    let mut dh_prev = vec![0.0; h];
    params.u.matvec_t_acc(&dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}
