//! Five-fold selection of predictor width and learning rate on generated
//! loop-sensor windows.

use lstm_gnb::pipeline::{load_windows, predictor_grid, prepare, select_predictor, ExperimentConfig};
use lstm_gnb::synth::Archetype;

fn main() -> lstm_gnb::Result<()> {
    let cfg = ExperimentConfig {
        n_normal: 120,
        n_abnormal: 10,
        ..ExperimentConfig::for_archetype(Archetype::Loop, 0)
    };
    let prepared = prepare(&cfg, &load_windows(&cfg)?)?;
    let grid = predictor_grid(&cfg.predictor(), &[4, 8, 16], &[0.01, 0.05], 20);
    let outcome = select_predictor(&prepared.split.normal_train, &grid, 5, cfg.split_seed)?;
    println!("hidden  lr     mean valid loss");
    for (c, s) in outcome.grid.iter().zip(&outcome.mean_scores) {
        println!("{:<6}  {:<5}  {s:.6}", c.hidden, c.learning_rate);
    }
    let best = outcome.best();
    println!("selected hidden {} lr {}", best.hidden, best.learning_rate);
    Ok(())
}
