//! Shared numerical machinery for the recurrent predictor and the baselines.

mod activation;
mod adagrad;
mod dropout;
mod gradcheck;
mod loss;
mod param;

pub use activation::{sigmoid, tanh_act};
pub use adagrad::{adagrad_step, AdagradState};
pub use dropout::{dropout_mask, fill_dropout_mask};
pub use gradcheck::{finite_diff_grad_check, numerical_gradient, relative_error};
pub use loss::{binary_cross_entropy, mse_final_step, PROB_CLAMP};
pub use param::{init_params, ParamBlock, ParamKind, Parameters};

/// Default Adagrad epsilon.
pub const ADAGRAD_EPSILON: f64 = 1e-8;
