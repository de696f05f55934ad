//! Confusion counts to accuracy, precision, recall and F-beta.

use lstm_gnb::metrics::{compute_metrics, f_beta, ConfusionCounts};

fn main() -> lstm_gnb::Result<()> {
    let counts = ConfusionCounts { tp: 16, fp: 1, tn: 32, fn_: 1 };
    for beta in [0.5, 1.0, 2.0] {
        let m = compute_metrics(&counts, beta)?;
        println!(
            "beta {beta}: accuracy {:.3} precision {:.3} recall {:.3} F {:.3}",
            m.accuracy, m.precision, m.recall, m.f_beta
        );
    }
    println!("P 0.846, R 0.931 -> F1 {:.4}", f_beta(0.846, 0.931, 1.0)?);
    Ok(())
}
