//! Repeats the experiment over several seeds and reports how often the
//! detector's F1 beats the MLP's.
//!
//! cargo run --release --example seed_sweep -- [archetype] [n_seeds]

use lstm_gnb::pipeline::{run_experiment, ExperimentConfig, Method};
use lstm_gnb::synth::Archetype;

fn main() -> lstm_gnb::Result<()> {
    let mut args = std::env::args().skip(1);
    let archetypes: Vec<Archetype> = match args.next() {
        Some(a) if a != "all" => vec![a.parse()?],
        _ => Archetype::ALL.to_vec(),
    };
    let n_seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    for archetype in archetypes {
        let mut wins = 0;
        let mut f1_sum = [0.0; 3];
        for seed in 0..n_seeds {
            let cfg = ExperimentConfig::for_archetype(archetype, seed);
            let (report, _) = run_experiment(&cfg)?;
            let f1: Vec<f64> = Method::ALL.iter().map(|&m| report.f1(m).unwrap_or(0.0)).collect();
            for (s, v) in f1_sum.iter_mut().zip(&f1) {
                *s += v;
            }
            if f1[0] > f1[2] {
                wins += 1;
            }
            let secs: f64 = report.timings.iter().map(|(_, s)| s).sum();
            println!(
                "{} seed {seed}: detector {:.3}  lstm {:.3}  mlp {:.3}  ({secs:.1}s)",
                archetype.name(),
                f1[0],
                f1[1],
                f1[2]
            );
        }
        let n = n_seeds as f64;
        println!(
            "{}: mean F1 detector {:.3} lstm {:.3} mlp {:.3}; detector > mlp in {wins}/{n_seeds}",
            archetype.name(),
            f1_sum[0] / n,
            f1_sum[1] / n,
            f1_sum[2] / n
        );
    }
    Ok(())
}
