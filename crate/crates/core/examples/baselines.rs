//! Trains the LSTM classifier and the MLP on a toy task (abnormal when the
//! window mean exceeds one half) and reports test accuracy.

use lstm_gnb::baselines::{train_lstm_classifier, train_mlp, ClassifierConfig, WindowClassifier};
use lstm_gnb::series::{Label, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn windows(n: usize, seed: u64) -> Vec<Window> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let level: f64 = rng.random_range(0.2..0.8);
            let points: Vec<f64> = (0..20).map(|_| (level + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0)).collect();
            let label = if points.iter().sum::<f64>() > 10.0 { Label::Abnormal } else { Label::Normal };
            Window::new(points, Some(label), i).unwrap()
        })
        .collect()
}

fn accuracy(model: &impl WindowClassifier, test: &[Window]) -> f64 {
    let hits = test
        .iter()
        .filter(|w| model.classify_window(w).map(|(l, _)| Some(l) == w.label).unwrap_or(false))
        .count();
    hits as f64 / test.len() as f64
}

fn main() -> lstm_gnb::Result<()> {
    let (train, valid, test) = (windows(400, 1), windows(50, 2), windows(200, 3));
    let cfg = ClassifierConfig {
        hidden: 8,
        epochs: 60,
        dropout: 0.0,
        patience: Some(10),
        ..ClassifierConfig::default()
    };
    let (lstm, h) = train_lstm_classifier(&train, &valid, &cfg)?;
    println!("LSTM NN: accuracy {:.3} (best epoch {:?})", accuracy(&lstm, &test), h.best_epoch);
    let (mlp, h) = train_mlp(&train, &valid, &ClassifierConfig { epochs: 200, ..cfg })?;
    println!("MLP:     accuracy {:.3} (best epoch {:?})", accuracy(&mlp, &test), h.best_epoch);
    Ok(())
}
