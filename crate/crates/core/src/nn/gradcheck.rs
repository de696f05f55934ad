use super::param::Parameters;

/// `|a - n| / max(|a|, |n|, 1e-8)`
pub fn relative_error(analytic: f64, numerical: f64) -> f64 {
    (analytic - numerical).abs() / analytic.abs().max(numerical.abs()).max(1e-8)
}

/// Central-difference gradient of `loss` at `params`, one entry at a time.
pub fn numerical_gradient<P, F>(loss: F, params: &P, epsilon: f64) -> P
where
    P: Parameters,
    F: Fn(&P) -> f64,
{
    let mut probe = params.clone();
    let mut grads = params.zeros_like();
    let n_blocks = params.blocks().len();
    for b in 0..n_blocks {
        let len = params.blocks()[b].len();
        for i in 0..len {
            let orig = probe.blocks()[b].values()[i];
            probe.blocks_mut()[b].values_mut()[i] = orig + epsilon;
            let plus = loss(&probe);
            probe.blocks_mut()[b].values_mut()[i] = orig - epsilon;
            let minus = loss(&probe);
            probe.blocks_mut()[b].values_mut()[i] = orig;
            grads.blocks_mut()[b].values_mut()[i] = (plus - minus) / (2.0 * epsilon);
        }
    }
    grads
}

/// Largest relative error between `analytic` and the central-difference
/// gradient of `loss` over every scalar parameter.
pub fn finite_diff_grad_check<P, F>(loss: F, params: &P, analytic: &P, epsilon: f64) -> f64
where
    P: Parameters,
    F: Fn(&P) -> f64,
{
    let numerical = numerical_gradient(loss, params, epsilon);
    analytic
        .blocks()
        .iter()
        .zip(numerical.blocks())
        .flat_map(|(a, n)| {
            a.values()
                .iter()
                .zip(n.values())
                .map(|(&x, &y)| relative_error(x, y))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}
