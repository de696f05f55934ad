//! Compares backpropagated gradients with central finite differences for
//! the predictor, the LSTM classifier and the MLP.

use lstm_gnb::baselines::{
    lstm_classifier_grad, lstm_classifier_loss, mlp_grad, mlp_loss, LstmClassifierParams, MlpParams,
};
use lstm_gnb::lstm::{bptt_backward, final_step_loss, forward, Mode, StackedLstmParams};
use lstm_gnb::nn::finite_diff_grad_check;
use lstm_gnb::series::{Label, Window};

fn main() -> lstm_gnb::Result<()> {
    let w = Window::new(vec![0.1, 0.5, 0.3, 0.8, 0.6, 0.2, 0.9, 0.4], Some(Label::Abnormal), 0)?;

    let p = StackedLstmParams::init(1, 4, 1.0, 1);
    let (_, cache) = forward(&p, &w, Mode::Infer)?;
    let (_, g) = bptt_backward(&cache, &w, &p, 0.0)?;
    let err = finite_diff_grad_check(|q| final_step_loss(q, &w).unwrap(), &p, &g, 1e-5);
    println!("predictor   max relative error {err:.2e}");

    let c = LstmClassifierParams::init(4, 2);
    let (_, g) = lstm_classifier_grad(&c, &w, Mode::Infer)?;
    let err = finite_diff_grad_check(|q| lstm_classifier_loss(q, &w).unwrap(), &c, &g, 1e-5);
    println!("classifier  max relative error {err:.2e}");

    let m = MlpParams::init(w.len(), 3);
    let (_, g) = mlp_grad(&m, &w, Mode::Infer)?;
    let err = finite_diff_grad_check(|q| mlp_loss(q, &w).unwrap(), &m, &g, 1e-5);
    println!("mlp         max relative error {err:.2e}");
    Ok(())
}
