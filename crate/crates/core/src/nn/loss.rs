/// Probabilities are clamped into `[PROB_CLAMP, 1 - PROB_CLAMP]` before the log.
pub const PROB_CLAMP: f64 = 1e-12;

/// Half squared error and its derivative with respect to the prediction.
#[inline]
pub fn mse_final_step(prediction: f64, target: f64) -> (f64, f64) {
    let d = prediction - target;
    (0.5 * d * d, d)
}

/// Binary cross-entropy of `prob` against `label`, with its derivative
/// with respect to the (clamped) probability.
pub fn binary_cross_entropy(prob: f64, label: u8) -> (f64, f64) {
    let p = prob.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if label == 1 {
        (-p.ln(), -1.0 / p)
    } else {
        (-(1.0 - p).ln(), 1.0 / (1.0 - p))
    }
}
