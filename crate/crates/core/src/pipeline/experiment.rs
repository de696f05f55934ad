use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::cv::{classifier_grid, predictor_grid, select_lstm_classifier, select_mlp, select_predictor};
use crate::baselines::{
    train_lstm_classifier, train_mlp, ClassifierConfig, LstmClassifierParams, MlpParams,
    WindowClassifier,
};
use crate::bayes::{classify, fit_nb, ErrorDataset, ErrorSplit, GaussNBModel};
use crate::error::{Error, Result, StageContext};
use crate::lstm::{prediction_errors, train_predictor, ErrorVector, PredictorConfig, StackedLstmParams};
use crate::metrics::{compute_metrics, ConfusionCounts, MetricReport};
use crate::series::{
    downsample, make_windows, read_labels_csv, read_series_file, split_dataset, DatasetSplit,
    Label, NormalizationParams, TimeSeries, Window,
};
use crate::synth::generate;
use crate::TrainHistory;

/// Labeled windows before splitting. Window ids (`source_offset`) are
/// unique across both lists.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSource {
    pub normal: Vec<Window>,
    pub abnormal: Vec<Window>,
    /// Seconds between points after downsampling.
    pub sample_interval: f64,
}

/// Loads the configured source and downsamples it. CSV series are cut into
/// windows after downsampling and labeled by window index.
pub fn load_windows(cfg: &ExperimentConfig) -> Result<WindowSource> {
    let factor = cfg.downsample_factor();
    let (windows, interval) = match (&cfg.series_csv, &cfg.labels_csv) {
        (Some(series_path), Some(labels_path)) => {
            let raw = read_series_file(series_path)?;
            let series = downsample(&raw, factor)?;
            let mut windows = make_windows(&series, cfg.window_len, cfg.stride)?;
            let labels: HashMap<usize, Label> = read_labels_csv(std::fs::File::open(labels_path)?)?
                .into_iter()
                .collect();
            if let Some(id) = labels.keys().find(|&&id| id >= windows.len()) {
                return Err(Error::InvalidWindow(format!(
                    "label for window {id} but only {} windows",
                    windows.len()
                )));
            }
            for (id, w) in windows.iter_mut().enumerate() {
                let label = labels
                    .get(&id)
                    .ok_or_else(|| Error::InvalidWindow(format!("window {id} has no label")))?;
                w.label = Some(*label);
                w.source_offset = id;
            }
            (windows, series.sample_interval())
        }
        (None, None) => {
            let gen = cfg.generator();
            let mut windows = Vec::new();
            for w in generate(&gen)? {
                let ts = TimeSeries::new("window", w.points, gen.sample_interval())?;
                let points = downsample(&ts, factor)?.values().to_vec();
                windows.push(Window::new(points, w.label, w.source_offset)?);
            }
            (windows, gen.sample_interval() * factor as f64)
        }
        _ => return Err(Error::Config("series_csv and labels_csv go together".into())),
    };
    let (abnormal, normal): (Vec<Window>, Vec<Window>) = windows
        .into_iter()
        .partition(|w| w.label.is_some_and(Label::is_abnormal));
    Ok(WindowSource {
        normal,
        abnormal,
        sample_interval: interval,
    })
}

/// Split plus min-max scaling fitted on the normal training windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub split: DatasetSplit,
    pub normalization: NormalizationParams,
}

pub fn prepare(cfg: &ExperimentConfig, source: &WindowSource) -> Result<Prepared> {
    let raw = split_dataset(&source.normal, &source.abnormal, cfg.ratios(), cfg.split_seed)?;
    let norm = NormalizationParams::fit_windows(&raw.normal_train)?;
    let scale = |ws: &[Window]| ws.iter().map(|w| norm.normalize_window(w)).collect::<Vec<_>>();
    Ok(Prepared {
        split: DatasetSplit {
            normal_train: scale(&raw.normal_train),
            normal_valid: scale(&raw.normal_valid),
            normal_test: scale(&raw.normal_test),
            abnormal_test: scale(&raw.abnormal_test),
        },
        normalization: norm,
    })
}

pub fn error_vectors(params: &StackedLstmParams, windows: &[Window]) -> Result<Vec<ErrorVector>> {
    windows.iter().map(|w| prediction_errors(params, w)).collect()
}

/// Shuffles each class separately and sends `floor(n_c * train_fraction)`
/// of it to the training set.
pub fn stratified_error_split(
    vectors: &[ErrorVector],
    train_fraction: f64,
    seed: u64,
) -> Result<(ErrorDataset, ErrorDataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Normal, Label::Abnormal] {
        let mut members: Vec<ErrorVector> = vectors
            .iter()
            .filter(|v| v.label == Some(class))
            .cloned()
            .collect();
        members.shuffle(&mut rng);
        let n_train = (members.len() as f64 * train_fraction + 1e-9).floor() as usize;
        test.extend(members.split_off(n_train));
        train.extend(members);
    }
    if train.len() + test.len() != vectors.len() {
        return Err(Error::Config("every error vector needs a label".into()));
    }
    Ok((
        ErrorDataset::new(train, ErrorSplit::Train)?,
        ErrorDataset::new(test, ErrorSplit::Test)?,
    ))
}

/// Windows for the supervised baselines. `test` holds exactly the windows
/// whose error vectors form the naive Bayes test set.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineData {
    pub train: Vec<Window>,
    pub valid: Vec<Window>,
    pub test: Vec<Window>,
}

/// Normal windows keep their train/valid roles. The abnormal windows on the
/// error-training side are split between train and valid in the same
/// proportion as the normal ones.
pub fn baseline_data(
    cfg: &ExperimentConfig,
    split: &DatasetSplit,
    error_train: &ErrorDataset,
    error_test: &ErrorDataset,
) -> Result<BaselineData> {
    let by_id: HashMap<usize, &Window> = split
        .normal_test
        .iter()
        .chain(&split.abnormal_test)
        .map(|w| (w.source_offset, w))
        .collect();
    let lookup = |v: &ErrorVector| -> Result<Window> {
        by_id
            .get(&v.window_id)
            .map(|w| (*w).clone())
            .ok_or_else(|| Error::InvalidWindow(format!("no window with id {}", v.window_id)))
    };
    let abnormal_side: Vec<Window> = error_train
        .vectors
        .iter()
        .filter(|v| v.label == Some(Label::Abnormal))
        .map(lookup)
        .collect::<Result<_>>()?;
    let share = cfg.split_valid / (cfg.split_train + cfg.split_valid);
    let n_valid = (abnormal_side.len() as f64 * share + 1e-9).floor() as usize;
    let (abn_valid, abn_train) = abnormal_side.split_at(n_valid);

    let mut train = split.normal_train.clone();
    train.extend_from_slice(abn_train);
    let mut valid = split.normal_valid.clone();
    valid.extend_from_slice(abn_valid);
    let test = error_test.vectors.iter().map(lookup).collect::<Result<_>>()?;
    Ok(BaselineData { train, valid, test })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "LSTM-Gauss-NBayes")]
    LstmGaussNb,
    #[serde(rename = "LSTM NN")]
    LstmNn,
    #[serde(rename = "MLP")]
    Mlp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::LstmGaussNb, Method::LstmNn, Method::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            Method::LstmGaussNb => "LSTM-Gauss-NBayes",
            Method::LstmNn => "LSTM NN",
            Method::Mlp => "MLP",
        }
    }

    /// Short form used in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Method::LstmGaussNb => "lgn",
            Method::LstmNn => "lstm_nn",
            Method::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub counts: ConfusionCounts,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SetSizes {
    pub normal_train: usize,
    pub normal_valid: usize,
    pub normal_test: usize,
    pub abnormal_test: usize,
    pub error_train: usize,
    pub error_test: usize,
    pub baseline_train: usize,
    pub baseline_valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedSettings {
    pub predictor: PredictorConfig,
    pub lstm_nn: ClassifierConfig,
    pub mlp: ClassifierConfig,
    pub cv_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub config: ExperimentConfig,
    pub selected: SelectedSettings,
    pub sizes: SetSizes,
    pub results: Vec<MethodResult>,
    /// `(model, history)` for the predictor and both baselines.
    pub histories: Vec<(String, TrainHistory)>,
    /// Wall-clock seconds per stage; kept out of every written file.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }

    pub fn f1(&self, method: Method) -> Option<f64> {
        self.result(method).map(|r| r.metrics.f_beta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModels {
    pub normalization: NormalizationParams,
    pub predictor: StackedLstmParams,
    pub nb: GaussNBModel,
    pub lstm_nn: LstmClassifierParams,
    pub mlp: MlpParams,
}

fn evaluate_classifier<C: WindowClassifier>(
    model: &C,
    windows: &[Window],
    beta: f64,
    method: Method,
) -> Result<MethodResult> {
    let mut counts = ConfusionCounts::default();
    for w in windows {
        let truth = w
            .label
            .ok_or_else(|| Error::Config("test window without a label".into()))?;
        counts.record(truth, model.classify_window(w)?.0);
    }
    Ok(MethodResult {
        method,
        counts,
        metrics: compute_metrics(&counts, beta)?,
    })
}

fn evaluate_detector(model: &GaussNBModel, test: &ErrorDataset, beta: f64) -> Result<MethodResult> {
    let mut counts = ConfusionCounts::default();
    for v in &test.vectors {
        let truth = v
            .label
            .ok_or_else(|| Error::Config("error vector without a label".into()))?;
        counts.record(truth, classify(model, &v.errors)?.0);
    }
    Ok(MethodResult {
        method: Method::LstmGaussNb,
        counts,
        metrics: compute_metrics(&counts, beta)?,
    })
}

fn cv_predictor(cfg: &ExperimentConfig, normal_train: &[Window]) -> Result<PredictorConfig> {
    let base = cfg.predictor();
    let grid = predictor_grid(&base, &cfg.cv_hidden_grid, &cfg.cv_learning_rate_grid, cfg.cv_epochs);
    let best = select_predictor(normal_train, &grid, cfg.cv_folds, cfg.split_seed)?.best();
    Ok(PredictorConfig {
        hidden: best.hidden,
        learning_rate: best.learning_rate,
        ..base
    })
}

fn cv_classifiers(
    cfg: &ExperimentConfig,
    labeled: &[Window],
) -> Result<(ClassifierConfig, ClassifierConfig)> {
    let base = cfg.classifier();
    let lrs = &cfg.cv_learning_rate_grid;
    let grid = classifier_grid(&base, &cfg.cv_hidden_grid, lrs, cfg.cv_epochs);
    let best = select_lstm_classifier(labeled, &grid, cfg.cv_folds, cfg.split_seed)?.best();
    let lstm_nn = ClassifierConfig {
        hidden: best.hidden,
        learning_rate: best.learning_rate,
        ..base
    };
    let grid = classifier_grid(&base, &[base.hidden], lrs, cfg.cv_epochs);
    let best = select_mlp(labeled, &grid, cfg.cv_folds, cfg.split_seed)?.best();
    let mlp = ClassifierConfig {
        learning_rate: best.learning_rate,
        ..base
    };
    Ok((lstm_nn, mlp))
}

/// Runs every stage for one configuration. Errors carry the name of the
/// stage that failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentReport, TrainedModels)> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    cfg.validate().stage("config")?;
    let source = load_windows(cfg).stage("preprocess")?;
    let prepared = prepare(cfg, &source).stage("preprocess")?;
    let split = &prepared.split;
    lap("preprocess", &mut timings);

    let mut selected = SelectedSettings {
        predictor: cfg.predictor(),
        lstm_nn: cfg.classifier(),
        mlp: cfg.classifier(),
        cv_used: cfg.cv,
    };
    if cfg.cv {
        selected.predictor = cv_predictor(cfg, &split.normal_train).stage("cv")?;
        lap("cv", &mut timings);
    }
    let (predictor, predictor_hist) = train_predictor(split, &selected.predictor).stage("predictor_training")?;
    lap("train", &mut timings);

    let mut test_windows = split.normal_test.clone();
    test_windows.extend_from_slice(&split.abnormal_test);
    let vectors = error_vectors(&predictor, &test_windows).stage("error_dataset")?;
    let (e_train, e_test) =
        stratified_error_split(&vectors, cfg.error_train_fraction, cfg.error_split_seed)
            .stage("error_dataset")?;
    lap("errors", &mut timings);

    let nb = fit_nb(&e_train, cfg.variance_floor).stage("nb_fit")?;
    let lgn = evaluate_detector(&nb, &e_test, cfg.beta).stage("evaluation")?;
    lap("fit-nb", &mut timings);

    let data = baseline_data(cfg, split, &e_train, &e_test).stage("baseline_training")?;
    if cfg.cv {
        // classifier selection needs the labeled baseline set
        let labeled: Vec<Window> = data.train.iter().chain(&data.valid).cloned().collect();
        (selected.lstm_nn, selected.mlp) = cv_classifiers(cfg, &labeled).stage("cv")?;
    }
    let (lstm_nn, lstm_hist) =
        train_lstm_classifier(&data.train, &data.valid, &selected.lstm_nn).stage("baseline_training")?;
    lap("lstm_nn", &mut timings);
    let (mlp, mlp_hist) = train_mlp(&data.train, &data.valid, &selected.mlp).stage("baseline_training")?;
    lap("mlp", &mut timings);

    let results = vec![
        lgn,
        evaluate_classifier(&lstm_nn, &data.test, cfg.beta, Method::LstmNn).stage("evaluation")?,
        evaluate_classifier(&mlp, &data.test, cfg.beta, Method::Mlp).stage("evaluation")?,
    ];
    let dataset = match &cfg.series_csv {
        Some(p) => p
            .file_stem()
            .map_or_else(|| "series".to_string(), |s| s.to_string_lossy().into_owned()),
        None => cfg.archetype.name().to_string(),
    };
    let report = ExperimentReport {
        dataset,
        config: cfg.clone(),
        selected,
        sizes: SetSizes {
            normal_train: split.normal_train.len(),
            normal_valid: split.normal_valid.len(),
            normal_test: split.normal_test.len(),
            abnormal_test: split.abnormal_test.len(),
            error_train: e_train.len(),
            error_test: e_test.len(),
            baseline_train: data.train.len(),
            baseline_valid: data.valid.len(),
        },
        results,
        histories: vec![
            ("predictor".into(), predictor_hist),
            ("lstm_nn".into(), lstm_hist),
            ("mlp".into(), mlp_hist),
        ],
        timings,
    };
    let models = TrainedModels {
        normalization: prepared.normalization,
        predictor,
        nb,
        lstm_nn,
        mlp,
    };
    Ok((report, models))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::Archetype;

    fn tiny(archetype: Archetype) -> ExperimentConfig {
        ExperimentConfig {
            n_normal: 60,
            n_abnormal: 20,
            hidden: 3,
            baseline_hidden: 3,
            epochs: 2,
            ..ExperimentConfig::for_archetype(archetype, 5)
        }
    }

    #[test]
    fn sets_line_up() {
        let cfg = tiny(Archetype::Loop);
        let (report, _) = run_experiment(&cfg).unwrap();
        let s = report.sizes;
        assert_eq!((s.normal_train, s.normal_valid, s.normal_test, s.abnormal_test), (48, 6, 6, 20));
        assert_eq!(s.error_train + s.error_test, 26);
        assert_eq!(s.error_train, 4 + 16);
        // 16 abnormal on the training side, 6/54 of them held out for validation
        assert_eq!(s.baseline_valid, 6 + 1);
        assert_eq!(s.baseline_train, 48 + 15);
        for r in &report.results {
            assert_eq!(r.counts.total(), s.error_test);
        }
        assert_eq!(report.results.iter().map(|r| r.method).collect::<Vec<_>>(), Method::ALL);
    }

    #[test]
    fn deterministic() {
        let cfg = tiny(Archetype::Land);
        let (a, ma) = run_experiment(&cfg).unwrap();
        let (b, mb) = run_experiment(&cfg).unwrap();
        assert_eq!(a.results, b.results);
        assert_eq!(a.histories, b.histories);
        assert_eq!(ma, mb);
    }

    #[test]
    fn errors_name_their_stage() {
        let cfg = ExperimentConfig {
            n_abnormal: 0,
            ..tiny(Archetype::Loop)
        };
        let err = run_experiment(&cfg).unwrap_err();
        assert!(err.to_string().starts_with("stage="), "{err}");
    }

    #[test]
    fn stratified_split_keeps_class_shares() {
        let vecs: Vec<ErrorVector> = (0..25)
            .map(|i| ErrorVector {
                errors: vec![i as f64],
                label: Some(if i < 15 { Label::Normal } else { Label::Abnormal }),
                window_id: i,
            })
            .collect();
        let (tr, te) = stratified_error_split(&vecs, 0.8, 3).unwrap();
        let count = |d: &ErrorDataset, l| d.vectors.iter().filter(|v| v.label == Some(l)).count();
        assert_eq!((count(&tr, Label::Normal), count(&tr, Label::Abnormal)), (12, 8));
        assert_eq!((count(&te, Label::Normal), count(&te, Label::Abnormal)), (3, 2));
    }
}
