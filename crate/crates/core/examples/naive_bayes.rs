//! Fits Gaussian naive Bayes on hand-made error vectors and shows the
//! per-class log-likelihoods behind one decision.

use lstm_gnb::bayes::{classify, evaluate_nb, fit_nb, log_likelihood, ErrorDataset, ErrorSplit};
use lstm_gnb::lstm::ErrorVector;
use lstm_gnb::metrics::compute_metrics;
use lstm_gnb::series::Label;

fn vector(errors: &[f64], label: Label, id: usize) -> ErrorVector {
    ErrorVector {
        errors: errors.to_vec(),
        label: Some(label),
        window_id: id,
    }
}

fn main() -> lstm_gnb::Result<()> {
    use Label::{Abnormal as A, Normal as N};
    let train = ErrorDataset::new(
        vec![
            vector(&[0.01, -0.02, 0.00], N, 0),
            vector(&[-0.03, 0.01, 0.02], N, 1),
            vector(&[0.02, 0.00, -0.01], N, 2),
            vector(&[0.00, 0.03, 0.01], N, 3),
            vector(&[0.30, 0.25, -0.10], A, 4),
            vector(&[-0.20, 0.35, 0.05], A, 5),
        ],
        ErrorSplit::Train,
    )?;
    let model = fit_nb(&train, 1e-9)?;
    println!("P(abnormal) = {:.3}", model.prior_abnormal);
    println!("normal   mean {:?}", model.mean[0]);
    println!("abnormal mean {:?}", model.mean[1]);

    let x = [0.15, 0.20, 0.0];
    let (label, p) = classify(&model, &x)?;
    println!(
        "x = {x:?}: log p(x|normal) {:.2}, log p(x|abnormal) {:.2} -> {label:?} (P = {p:.4})",
        log_likelihood(&model, &x, N)?,
        log_likelihood(&model, &x, A)?
    );

    let test = ErrorDataset::new(
        vec![vector(&[0.01, 0.01, 0.0], N, 6), vector(&[0.25, 0.30, 0.0], A, 7)],
        ErrorSplit::Test,
    )?;
    let m = compute_metrics(&evaluate_nb(&model, &test)?, 1.0)?;
    println!("test accuracy {:.3}, F1 {:.3}", m.accuracy, m.f_beta);
    Ok(())
}
