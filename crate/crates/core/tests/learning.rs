//! Small learnability experiments, each fixed by seed.

use lstm_gnb::baselines::{train_lstm_classifier, train_mlp, ClassifierConfig, WindowClassifier};
use lstm_gnb::bayes::{evaluate_nb, fit_nb, ErrorDataset, ErrorSplit};
use lstm_gnb::lstm::{forward, train_predictor_on, ErrorVector, Mode, PredictorConfig};
use lstm_gnb::metrics::compute_metrics;
use lstm_gnb::pipeline::{predictor_grid, select_predictor};
use lstm_gnb::series::{Label, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn predictor(hidden: usize, epochs: usize) -> PredictorConfig {
    PredictorConfig {
        hidden,
        epochs,
        dropout: 0.0,
        l2: 0.0,
        seed: 3,
        ..PredictorConfig::default()
    }
}

fn sine_windows(n: usize, len: usize, seed: u64) -> Vec<Window> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let points = (0..len)
                .map(|t| 0.5 + 0.4 * (phase + t as f64 * std::f64::consts::TAU / 12.0).sin())
                .collect();
            Window::new(points, Some(Label::Normal), i).unwrap()
        })
        .collect()
}

#[test]
fn constant_windows_are_learned() {
    let windows: Vec<Window> = (0..10)
        .map(|i| Window::new(vec![0.5; 12], Some(Label::Normal), i).unwrap())
        .collect();
    let (_, history) = train_predictor_on(&windows, &windows[..2], &predictor(4, 200)).unwrap();
    let last = history.records.last().unwrap();
    assert!(last.epoch <= 200);
    assert!(last.train_loss <= 1e-4, "{last:?}");
}

#[test]
fn sine_final_step_rmse() {
    let train = sine_windows(12, 50, 1);
    let valid = sine_windows(6, 50, 2);
    let (params, _) = train_predictor_on(&train, &valid, &predictor(8, 1000)).unwrap();
    let sq: f64 = valid
        .iter()
        .map(|w| {
            let (pred, _) = forward(&params, w, Mode::Infer).unwrap();
            (pred[pred.len() - 1] - w.points[w.len() - 1]).powi(2)
        })
        .sum();
    let rmse = (sq / valid.len() as f64).sqrt();
    assert!(rmse <= 0.05, "rmse {rmse}");
}

fn mean_task(n: usize, seed: u64) -> Vec<Window> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let level: f64 = rng.random_range(0.2..0.8);
            let points: Vec<f64> = (0..20)
                .map(|_| (level + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0))
                .collect();
            let mean = points.iter().sum::<f64>() / 20.0;
            let label = if mean > 0.5 { Label::Abnormal } else { Label::Normal };
            Window::new(points, Some(label), i).unwrap()
        })
        .collect()
}

fn accuracy(model: &impl WindowClassifier, test: &[Window]) -> f64 {
    let hits = test
        .iter()
        .filter(|w| model.classify_window(w).unwrap().0 == w.label.unwrap())
        .count();
    hits as f64 / test.len() as f64
}

fn classifier(hidden: usize, epochs: usize) -> ClassifierConfig {
    ClassifierConfig {
        hidden,
        epochs,
        dropout: 0.0,
        l2: 0.0,
        seed: 5,
        patience: Some(10),
        ..ClassifierConfig::default()
    }
}

#[test]
fn lstm_classifier_learns_window_mean() {
    let train = mean_task(400, 10);
    let valid = mean_task(50, 11);
    let test = mean_task(200, 12);
    let (model, _) = train_lstm_classifier(&train, &valid, &classifier(8, 60)).unwrap();
    let acc = accuracy(&model, &test);
    assert!(acc >= 0.95, "accuracy {acc}");
}

#[test]
fn mlp_learns_window_mean() {
    let train = mean_task(400, 20);
    let valid = mean_task(50, 21);
    let test = mean_task(200, 22);
    let (model, _) = train_mlp(&train, &valid, &classifier(8, 200)).unwrap();
    let acc = accuracy(&model, &test);
    assert!(acc >= 0.90, "accuracy {acc}");
}

fn separated(n: usize, d: usize, rng: &mut ChaCha8Rng, split: ErrorSplit) -> ErrorDataset {
    let noise = Normal::new(0.0, 0.1).unwrap();
    let vectors = (0..n)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Normal } else { Label::Abnormal };
            let centre = if label.is_abnormal() { 1.0 } else { -1.0 };
            ErrorVector {
                errors: (0..d).map(|_| centre + noise.sample(rng)).collect(),
                label: Some(label),
                window_id: i,
            }
        })
        .collect();
    ErrorDataset::new(vectors, split).unwrap()
}

#[test]
fn naive_bayes_separates_distant_classes() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let train = separated(100, 4, &mut rng, ErrorSplit::Train);
        let test = separated(1000, 4, &mut rng, ErrorSplit::Test);
        let model = fit_nb(&train, 1e-9).unwrap();
        let acc = compute_metrics(&evaluate_nb(&model, &test).unwrap(), 1.0).unwrap().accuracy;
        assert!(acc >= 0.999, "seed {seed}: {acc}");
    }
}

#[test]
fn crossval_rejects_an_absurd_learning_rate() {
    let windows = sine_windows(20, 16, 7);
    let base = predictor(4, 15);
    let grid = predictor_grid(&base, &[4], &[0.05, 1e6], 15);
    let outcome = select_predictor(&windows, &grid, 4, 9).unwrap();
    assert_eq!(outcome.best().learning_rate, 0.05, "{:?}", outcome.mean_scores);
}
