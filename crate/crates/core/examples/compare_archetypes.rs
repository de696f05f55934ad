//! Runs the full experiment on each synthetic archetype and prints the
//! comparison table.
//!
//! cargo run --release --example compare_archetypes -- [seed]

use lstm_gnb::pipeline::{metrics_table, run_experiment, ExperimentConfig};
use lstm_gnb::synth::Archetype;

fn main() -> lstm_gnb::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut reports = Vec::new();
    for archetype in Archetype::ALL {
        let cfg = ExperimentConfig::for_archetype(archetype, seed);
        let (report, _) = run_experiment(&cfg)?;
        let timing: Vec<String> = report
            .timings
            .iter()
            .map(|(stage, secs)| format!("{stage} {secs:.1}s"))
            .collect();
        let epochs: Vec<String> = report
            .histories
            .iter()
            .map(|(m, h)| format!("{m} {}/{:?}", h.records.len(), h.best_epoch))
            .collect();
        eprintln!("{}: {} | epochs {}", archetype.name(), timing.join(", "), epochs.join(", "));
        reports.push(report);
    }
    print!("{}", metrics_table(&reports.iter().collect::<Vec<_>>()));
    Ok(())
}
