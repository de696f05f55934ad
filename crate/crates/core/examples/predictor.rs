//! Trains the stacked-LSTM predictor on normal loop-sensor windows and
//! finds the step where held-out normal and abnormal errors differ most.

use lstm_gnb::lstm::{prediction_errors, train_predictor};
use lstm_gnb::pipeline::{load_windows, prepare, ExperimentConfig};
use lstm_gnb::synth::Archetype;

fn main() -> lstm_gnb::Result<()> {
    let cfg = ExperimentConfig {
        n_normal: 150,
        n_abnormal: 10,
        ..ExperimentConfig::for_archetype(Archetype::Loop, 1)
    };
    let prepared = prepare(&cfg, &load_windows(&cfg)?)?;
    let (params, history) = train_predictor(&prepared.split, &cfg.predictor())?;
    println!(
        "{} epochs, best {:?}, valid loss {:.5}",
        history.records.len(),
        history.best_epoch,
        history.best_valid_loss().unwrap_or(f64::NAN)
    );
    let mean_errors = |windows: &[lstm_gnb::series::Window]| -> lstm_gnb::Result<Vec<f64>> {
        let mut sum = Vec::new();
        for w in windows {
            let e = prediction_errors(&params, w)?.errors;
            sum.resize(e.len(), 0.0);
            sum.iter_mut().zip(&e).for_each(|(s, x)| *s += x);
        }
        Ok(sum.iter().map(|s| s / windows.len() as f64).collect())
    };
    let normal = mean_errors(&prepared.split.normal_test)?;
    let abnormal = mean_errors(&prepared.split.abnormal_test)?;
    let gap: Vec<f64> = normal.iter().zip(&abnormal).map(|(a, b)| (a - b).abs()).collect();
    let step = (0..gap.len()).max_by(|&a, &b| gap[a].total_cmp(&gap[b])).unwrap();
    println!("{} error positions per window", gap.len());
    println!(
        "widest gap at step {step}: mean error {:+.4} on normal windows, {:+.4} on abnormal",
        normal[step], abnormal[step]
    );
    Ok(())
}
