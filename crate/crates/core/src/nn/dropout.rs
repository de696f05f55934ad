use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Inverted-dropout mask of length `len`: each entry is 0 with probability
/// `rate`, otherwise `1 / (1 - rate)`.
pub fn dropout_mask(len: usize, rate: f64, seed: u64) -> Result<Vec<f64>> {
    let mut mask = vec![0.0; len];
    fill_dropout_mask(&mut mask, rate, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(mask)
}

pub fn fill_dropout_mask<R: Rng>(mask: &mut [f64], rate: f64, rng: &mut R) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidRate(rate));
    }
    if rate == 0.0 {
        mask.iter_mut().for_each(|m| *m = 1.0);
        return Ok(());
    }
    let keep = 1.0 / (1.0 - rate);
    for m in mask.iter_mut() {
        *m = if rng.random::<f64>() < rate { 0.0 } else { keep };
    }
    Ok(())
}
