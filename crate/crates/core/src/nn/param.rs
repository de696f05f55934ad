use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights take L2 decay; biases do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    Weight,
    Bias,
}

/// A dense row-major matrix (or column vector) of learnable values.
///
/// The shape is fixed at construction; only the values change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlock")]
pub struct ParamBlock {
    name: String,
    kind: ParamKind,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBlock {
    name: String,
    kind: ParamKind,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl TryFrom<RawBlock> for ParamBlock {
    type Error = Error;

    fn try_from(raw: RawBlock) -> Result<Self> {
        Self::from_values(raw.name, raw.kind, raw.rows, raw.cols, raw.values)
    }
}

impl ParamBlock {
    pub fn zeros(name: impl Into<String>, kind: ParamKind, rows: usize, cols: usize) -> Self {
        Self {
            name: name.into(),
            kind,
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_values(
        name: impl Into<String>,
        kind: ParamKind,
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "block '{name}': {} values for shape {rows}x{cols}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("block '{name}' has non-finite entries")));
        }
        Ok(Self {
            name,
            kind,
            rows,
            cols,
            values,
        })
    }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) entries.
    pub fn uniform<R: Rng>(
        name: impl Into<String>,
        kind: ParamKind,
        rows: usize,
        cols: usize,
        fan_in: usize,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let mut block = Self::zeros(name, kind, rows, cols);
        for v in &mut block.values {
            *v = rng.random_range(-bound..=bound);
        }
        block
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, v: f64) {
        self.values.iter_mut().for_each(|x| *x = v);
    }

    /// `out += self * x`
    #[inline]
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.values.chunks_exact(self.cols)) {
            *o += dot(row, x);
        }
    }

    /// `out += self^T * d`
    #[inline]
    pub fn matvec_t_acc(&self, d: &[f64], out: &mut [f64]) {
        debug_assert_eq!(d.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (&di, row) in d.iter().zip(self.values.chunks_exact(self.cols)) {
            if di != 0.0 {
                axpy(di, row, out);
            }
        }
    }

    /// `self += d * x^T`
    #[inline]
    pub fn outer_acc(&mut self, d: &[f64], x: &[f64]) {
        debug_assert_eq!(d.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        let cols = self.cols;
        for (&di, row) in d.iter().zip(self.values.chunks_exact_mut(cols)) {
            if di != 0.0 {
                axpy(di, x, row);
            }
        }
    }

    /// `self += d` for a vector-shaped block.
    #[inline]
    pub fn add_vec(&mut self, d: &[f64]) {
        debug_assert_eq!(d.len(), self.values.len());
        axpy(1.0, d, &mut self.values);
    }

    pub fn same_shape(&self, other: &ParamBlock) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Draws a block with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) entries from
/// a seeded generator.
pub fn init_params(
    name: impl Into<String>,
    rows: usize,
    cols: usize,
    fan_in: usize,
    seed: u64,
) -> Result<ParamBlock> {
    if fan_in == 0 {
        return Err(Error::Shape("fan_in must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ParamBlock::uniform(name, ParamKind::Weight, rows, cols, fan_in, &mut rng))
}

/// A model whose learnable state is an ordered list of blocks. Gradients
/// share the model's type so the same layout indexes both.
pub trait Parameters: Clone {
    fn blocks(&self) -> Vec<&ParamBlock>;
    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.blocks_mut().into_iter().for_each(|b| b.fill(0.0));
        z
    }

    fn num_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    /// Half the squared norm of every weight (not bias) block.
    fn l2_penalty(&self) -> f64 {
        0.5 * self
            .blocks()
            .iter()
            .filter(|b| b.kind() == ParamKind::Weight)
            .map(|b| b.sum_squares())
            .sum::<f64>()
    }

    /// Adds `l2 * theta` to every weight entry of `grads`.
    fn add_l2_grad(&self, grads: &mut Self, l2: f64) {
        if l2 == 0.0 {
            return;
        }
        for (p, g) in self.blocks().into_iter().zip(grads.blocks_mut()) {
            if p.kind() == ParamKind::Weight {
                axpy(l2, p.values(), g.values_mut());
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.values().iter().all(|v| v.is_finite()))
    }
}

impl Parameters for ParamBlock {
    fn blocks(&self) -> Vec<&ParamBlock> {
        vec![self]
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock> {
        vec![self]
    }
}

impl Parameters for Vec<ParamBlock> {
    fn blocks(&self) -> Vec<&ParamBlock> {
        self.iter().collect()
    }

    fn blocks_mut(&mut self) -> Vec<&mut ParamBlock> {
        self.iter_mut().collect()
    }
}
