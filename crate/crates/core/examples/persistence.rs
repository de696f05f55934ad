//! Saves a trained predictor to JSON, reloads it and checks that its
//! prediction errors are bit-identical.

use lstm_gnb::lstm::{prediction_errors, train_predictor_on, PredictorConfig, StackedLstmParams};
use lstm_gnb::pipeline::{load_model, save_model};
use lstm_gnb::series::{Label, Window};

fn main() -> lstm_gnb::Result<()> {
    let windows: Vec<Window> = (0..16)
        .map(|k| {
            let points = (0..24).map(|t| 0.5 + 0.4 * ((t + k) as f64 * 0.5).sin()).collect();
            Window::new(points, Some(Label::Normal), k)
        })
        .collect::<lstm_gnb::Result<_>>()?;
    let cfg = PredictorConfig {
        hidden: 6,
        epochs: 30,
        ..PredictorConfig::default()
    };
    let (params, _) = train_predictor_on(&windows[..12], &windows[12..], &cfg)?;

    let dir = std::env::temp_dir().join("lgnb-persistence-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("predictor.json");
    save_model(&params, &path)?;
    let loaded: StackedLstmParams = load_model(&path)?;

    let same = windows.iter().all(|w| {
        let a = prediction_errors(&params, w).unwrap().errors;
        let b = prediction_errors(&loaded, w).unwrap().errors;
        a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
    });
    println!("{} bytes written to {}", std::fs::metadata(&path)?.len(), path.display());
    println!("reloaded predictions bit-identical: {same}");
    Ok(())
}
