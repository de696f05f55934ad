//! End-to-end experiment: load or generate windows, split and normalize,
//! train the predictor, turn its errors into naive Bayes features, train
//! the baselines on matching windows, and report all three.

mod config;
mod cv;
mod experiment;
mod persist;
mod report;
mod tables;

pub use config::{ExperimentConfig, OUT_DIR_ENV};
pub use cv::{
    classifier_grid, crossval_select, fold_indices, predictor_grid, select_lstm_classifier,
    select_mlp, select_predictor, CvOutcome,
};
pub use experiment::{
    baseline_data, error_vectors, load_windows, prepare, run_experiment, stratified_error_split,
    BaselineData, ExperimentReport, Method, MethodResult, Prepared, SelectedSettings, SetSizes,
    TrainedModels, WindowSource,
};
pub use persist::{from_json, load_model, save_model, to_json, ModelFile, FORMAT_VERSION};
pub use report::{emit_report, metrics_csv, metrics_table, save_models, METRICS_HEADER};
pub use tables::{read_errors_csv, read_windows_csv, write_errors_csv, write_windows_csv};
