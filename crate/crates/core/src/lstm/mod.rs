//! Stacked two-layer LSTM: cell, stack with output head and BPTT, and the
//! one-step-ahead predictor trained on normal windows.

mod cell;
mod predictor;
mod stack;

pub use cell::{lstm_cell_step, CellState, Gate, LstmCellParams, StepCache};
pub use predictor::{
    bptt_backward, final_step_loss, forward, prediction_errors, train_predictor,
    train_predictor_on, ErrorVector, PredictorConfig,
};
pub use stack::{stack_backward, stack_forward, ForwardCache, Mode, StackedLstmParams};
