use crate::error::{Error, Result};

use super::param::{ParamBlock, Parameters};

/// Applies one Adagrad update to a single block:
/// `acc += g^2; theta -= lr * g / (sqrt(acc) + eps)`.
pub fn adagrad_step(
    params: &mut ParamBlock,
    grads: &ParamBlock,
    accumulators: &mut [f64],
    learning_rate: f64,
    epsilon: f64,
) -> Result<()> {
    if !params.same_shape(grads) || accumulators.len() != params.len() {
        return Err(Error::Shape(format!(
            "adagrad: params '{}' {:?}, grads {:?}, {} accumulators",
            params.name(),
            params.shape(),
            grads.shape(),
            accumulators.len()
        )));
    }
    for ((theta, &g), acc) in params
        .values_mut()
        .iter_mut()
        .zip(grads.values())
        .zip(accumulators.iter_mut())
    {
        *acc += g * g;
        if g != 0.0 {
            *theta -= learning_rate * g / (acc.sqrt() + epsilon);
        }
    }
    Ok(())
}

/// Per-parameter sums of squared gradients for a whole model.
#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    accumulators: Vec<Vec<f64>>,
    learning_rate: f64,
    epsilon: f64,
}

impl AdagradState {
    pub fn new(learning_rate: f64, epsilon: f64) -> Result<Self> {
        if !(learning_rate > 0.0) || !learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        if epsilon < 0.0 || !epsilon.is_finite() {
            return Err(Error::Config(format!("adagrad epsilon must be >= 0, got {epsilon}")));
        }
        Ok(Self {
            accumulators: Vec::new(),
            learning_rate,
            epsilon,
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn accumulators(&self) -> &[Vec<f64>] {
        &self.accumulators
    }

    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let mut blocks = params.blocks_mut();
        let grad_blocks = grads.blocks();
        if blocks.len() != grad_blocks.len() {
            return Err(Error::Shape(format!(
                "adagrad: {} parameter blocks vs {} gradient blocks",
                blocks.len(),
                grad_blocks.len()
            )));
        }
        if self.accumulators.is_empty() {
            self.accumulators = blocks.iter().map(|b| vec![0.0; b.len()]).collect();
        }
        if self.accumulators.len() != blocks.len() {
            return Err(Error::Shape("adagrad state belongs to a different model".into()));
        }
        for ((p, g), acc) in blocks
            .iter_mut()
            .zip(grad_blocks)
            .zip(self.accumulators.iter_mut())
        {
            adagrad_step(p, g, acc, self.learning_rate, self.epsilon)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ParamKind;

    fn scalar(v: f64) -> ParamBlock {
        ParamBlock::from_values("p", ParamKind::Weight, 1, 1, vec![v]).unwrap()
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = ParamBlock::from_values("p", ParamKind::Weight, 2, 2, vec![1., 2., 3., 4.])
            .unwrap();
        let before = p.clone();
        let mut state = AdagradState::new(0.1, 1e-8).unwrap();
        state.step(&mut p, &before.zeros_like()).unwrap();
        assert_eq!(p, before);
        assert!(state.accumulators()[0].iter().all(|&a| a == 0.0));
    }

    #[test]
    fn analytic_two_steps() {
        let mut p = scalar(1.0);
        let mut state = AdagradState::new(0.1, 0.0).unwrap();
        state.step(&mut p, &scalar(3.0)).unwrap();
        assert!((p.values()[0] - 0.9).abs() < 1e-15);
        state.step(&mut p, &scalar(4.0)).unwrap();
        assert_eq!(state.accumulators()[0][0], 25.0);
        assert!((p.values()[0] - (0.9 - 0.08)).abs() < 1e-15);
    }

    #[test]
    fn accumulators_never_decrease_and_follow_formula() {
        let mut p = scalar(0.5);
        let mut state = AdagradState::new(0.05, 1e-8).unwrap();
        let mut prev_acc = 0.0;
        for (i, g) in [0.3, -1.2, 0.0, 2.5, -0.01].into_iter().enumerate() {
            let theta = p.values()[0];
            state.step(&mut p, &scalar(g)).unwrap();
            let acc = state.accumulators()[0][0];
            assert!(acc >= prev_acc, "step {i}");
            assert_eq!(acc, prev_acc + g * g);
            let expect = if g == 0.0 { theta } else { theta - 0.05 * g / (acc.sqrt() + 1e-8) };
            assert_eq!(p.values()[0], expect);
            prev_acc = acc;
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = scalar(1.0);
        let g = ParamBlock::zeros("g", ParamKind::Weight, 2, 1);
        let mut acc = vec![0.0];
        assert!(matches!(
            adagrad_step(&mut p, &g, &mut acc, 0.1, 1e-8),
            Err(Error::Shape(_))
        ));
        assert!(AdagradState::new(0.0, 1e-8).is_err());
    }
}
