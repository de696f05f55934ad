use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lstm_gnb::baselines::{train_lstm_classifier, train_mlp};
use lstm_gnb::bayes::{classify, fit_nb, GaussNBModel};
use lstm_gnb::error::{Error, Result, StageContext};
use lstm_gnb::lstm::{train_predictor, StackedLstmParams};
use lstm_gnb::metrics::{compute_metrics, ConfusionCounts};
use lstm_gnb::pipeline::{
    baseline_data, emit_report, error_vectors, load_model, load_windows, metrics_table, predictor_grid,
    prepare, read_errors_csv, run_experiment, save_model, save_models, select_predictor,
    stratified_error_split, write_errors_csv, write_windows_csv, ExperimentConfig, Method,
};
use lstm_gnb::series::{
    acf, downsample, read_series_file, write_labels_csv, write_series_csv, Label, TimeSeries,
};
use lstm_gnb::synth::{concat_stream, generate, Archetype};

/// Anomaly detection from stacked-LSTM prediction errors and Gaussian
/// naive Bayes.
#[derive(Parser)]
#[command(name = "lgnb", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Derive every seed from this value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic series, its window labels and a matching config.
    Generate {
        #[arg(long)]
        archetype: Option<Archetype>,
    },
    /// Split and normalize the windows; writes windows.csv.
    Preprocess,
    /// Train the predictor on normal windows.
    Train,
    /// Compute error vectors for the held-out windows; writes errors.csv.
    Errors {
        #[arg(long)]
        predictor: Option<PathBuf>,
    },
    /// Fit naive Bayes on the training error vectors.
    FitNb {
        #[arg(long)]
        errors: Option<PathBuf>,
    },
    /// Score the detector and both baselines on the test error vectors.
    Evaluate {
        #[arg(long)]
        nb: Option<PathBuf>,
        #[arg(long)]
        errors: Option<PathBuf>,
    },
    /// Every stage end to end.
    Run,
    /// Autocorrelation of a series (or of a generated normal stream).
    Acf {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
        #[arg(long)]
        downsample: Option<usize>,
        #[arg(long)]
        archetype: Option<Archetype>,
    },
    /// Five-fold selection of predictor width and learning rate.
    Cv {
        #[arg(long)]
        epochs: Option<usize>,
    },
}

fn load_config(cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    let out = cfg.resolved_out_dir();
    std::fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn or_default(path: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| out.join(name))
}

fn generate_cmd(cfg: &mut ExperimentConfig, out: &Path, archetype: Option<Archetype>) -> Result<()> {
    if let Some(a) = archetype {
        cfg.archetype = a;
    }
    cfg.series_csv = None;
    cfg.labels_csv = None;
    cfg.validate()?;
    let gen = cfg.generator();
    let windows = generate(&gen)?;
    let raw_len = windows[0].len();
    let values: Vec<f64> = windows.iter().flat_map(|w| w.points.iter().copied()).collect();
    let series = TimeSeries::new(cfg.archetype.name(), values, gen.sample_interval())?;
    write_series_csv(&series, BufWriter::new(File::create(out.join("series.csv"))?))?;
    let labels: Vec<(usize, Label)> = windows
        .iter()
        .map(|w| (w.source_offset, w.label.unwrap_or(Label::Normal)))
        .collect();
    write_labels_csv(&labels, BufWriter::new(File::create(out.join("labels.csv"))?))?;

    let factor = cfg.downsample_factor();
    let dataset = ExperimentConfig {
        series_csv: Some("series.csv".into()),
        labels_csv: Some("labels.csv".into()),
        downsample: Some(factor),
        window_len: raw_len / factor,
        stride: raw_len / factor,
        out_dir: None,
        ..cfg.clone()
    };
    std::fs::write(out.join("dataset.toml"), dataset.to_toml_string())?;
    println!(
        "{} windows ({} abnormal) of {raw_len} points -> {}",
        windows.len(),
        gen.n_abnormal,
        out.display()
    );
    Ok(())
}

fn evaluate_cmd(cfg: &ExperimentConfig, out: &Path, nb: PathBuf, errors: PathBuf) -> Result<()> {
    let model: GaussNBModel = load_model(&nb).stage("evaluation")?;
    let (e_train, e_test) = read_errors_csv(File::open(&errors)?).stage("evaluation")?;
    let mut counts = ConfusionCounts::default();
    for v in &e_test.vectors {
        let truth = v.label.ok_or_else(|| Error::Config("unlabeled error vector".into()))?;
        counts.record(truth, classify(&model, &v.errors)?.0);
    }
    let lgn = compute_metrics(&counts, cfg.beta).stage("evaluation")?;

    let prepared = load_windows(cfg)
        .and_then(|src| prepare(cfg, &src))
        .stage("preprocess")?;
    let data = baseline_data(cfg, &prepared.split, &e_train, &e_test).stage("baseline_training")?;
    let (lstm_nn, lstm_hist) =
        train_lstm_classifier(&data.train, &data.valid, &cfg.classifier()).stage("baseline_training")?;
    let (mlp, mlp_hist) = train_mlp(&data.train, &data.valid, &cfg.classifier()).stage("baseline_training")?;
    save_model(&lstm_nn, &out.join("lstm_nn.json"))?;
    save_model(&mlp, &out.join("mlp.json"))?;

    use lstm_gnb::baselines::WindowClassifier;
    let score = |c: &dyn WindowClassifier| -> Result<ConfusionCounts> {
        let mut k = ConfusionCounts::default();
        for w in &data.test {
            k.record(w.label.unwrap_or(Label::Normal), c.classify_window(w)?.0);
        }
        Ok(k)
    };
    let mut csv = String::from("method,accuracy,precision,recall,f1\n");
    let rows = [
        (Method::LstmGaussNb, lgn),
        (Method::LstmNn, compute_metrics(&score(&lstm_nn)?, cfg.beta)?),
        (Method::Mlp, compute_metrics(&score(&mlp)?, cfg.beta)?),
    ];
    for (m, r) in &rows {
        csv.push_str(&format!(
            "{m},{:.3},{:.3},{:.3},{:.3}\n",
            r.accuracy, r.precision, r.recall, r.f_beta
        ));
    }
    std::fs::write(out.join("metrics.csv"), &csv)?;
    std::fs::write(out.join("history_lstm_nn.csv"), lstm_hist.to_csv())?;
    std::fs::write(out.join("history_mlp.csv"), mlp_hist.to_csv())?;
    print!("{csv}");
    Ok(())
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Preprocess => "preprocess",
            Command::Train => "predictor_training",
            Command::Errors { .. } => "error_dataset",
            Command::FitNb { .. } => "nb_fit",
            Command::Evaluate { .. } => "evaluation",
            Command::Run => "run",
            Command::Acf { .. } => "acf",
            Command::Cv { .. } => "cv",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let stage = cli.command.stage();
    dispatch(cli).map_err(|e| match e {
        Error::Stage { .. } => e,
        other => Error::Stage {
            stage,
            source: Box::new(other),
        },
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    let (mut cfg, out) = load_config(&cli).stage("config")?;
    match cli.command {
        Command::Generate { archetype } => generate_cmd(&mut cfg, &out, archetype).stage("generate"),
        Command::Preprocess => {
            let src = load_windows(&cfg).stage("preprocess")?;
            let prepared = prepare(&cfg, &src).stage("preprocess")?;
            let path = out.join("windows.csv");
            write_windows_csv(&prepared.split, BufWriter::new(File::create(&path)?)).stage("preprocess")?;
            save_model(&prepared.normalization, &out.join("normalization.json"))?;
            let s = &prepared.split;
            println!(
                "normal train/valid/test {}/{}/{}, abnormal test {} -> {}",
                s.normal_train.len(),
                s.normal_valid.len(),
                s.normal_test.len(),
                s.abnormal_test.len(),
                path.display()
            );
            Ok(())
        }
        Command::Train => {
            cfg.validate().stage("config")?;
            let prepared = load_windows(&cfg)
                .and_then(|src| prepare(&cfg, &src))
                .stage("preprocess")?;
            let (params, hist) =
                train_predictor(&prepared.split, &cfg.predictor()).stage("predictor_training")?;
            save_model(&params, &out.join("predictor.json"))?;
            save_model(&prepared.normalization, &out.join("normalization.json"))?;
            std::fs::write(out.join("history_predictor.csv"), hist.to_csv())?;
            println!(
                "{} epochs, best {:?} (valid loss {:.6})",
                hist.records.len(),
                hist.best_epoch,
                hist.best_valid_loss().unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Command::Errors { predictor } => {
            let params: StackedLstmParams =
                load_model(&or_default(&predictor, &out, "predictor.json")).stage("error_dataset")?;
            let prepared = load_windows(&cfg)
                .and_then(|src| prepare(&cfg, &src))
                .stage("preprocess")?;
            let s = &prepared.split;
            let windows: Vec<_> = s.normal_test.iter().chain(&s.abnormal_test).cloned().collect();
            let vectors = error_vectors(&params, &windows).stage("error_dataset")?;
            let (tr, te) = stratified_error_split(&vectors, cfg.error_train_fraction, cfg.error_split_seed)
                .stage("error_dataset")?;
            write_errors_csv(&[&tr, &te], BufWriter::new(File::create(out.join("errors.csv"))?))
                .stage("error_dataset")?;
            println!("{} training and {} test error vectors of dimension {}", tr.len(), te.len(), tr.dim());
            Ok(())
        }
        Command::FitNb { errors } => {
            let (tr, _) =
                read_errors_csv(File::open(or_default(&errors, &out, "errors.csv"))?).stage("nb_fit")?;
            let model = fit_nb(&tr, cfg.variance_floor).stage("nb_fit")?;
            save_model(&model, &out.join("nb.json"))?;
            println!("prior P(abnormal) = {:.4} over {} attributes", model.prior_abnormal, model.dim());
            Ok(())
        }
        Command::Evaluate { nb, errors } => evaluate_cmd(
            &cfg,
            &out,
            or_default(&nb, &out, "nb.json"),
            or_default(&errors, &out, "errors.csv"),
        ),
        Command::Run => {
            let (report, models) = run_experiment(&cfg)?;
            emit_report(&report, &out).stage("report")?;
            save_models(&models, &out).stage("report")?;
            for (stage, secs) in &report.timings {
                eprintln!("{stage:>12} {secs:8.2}s");
            }
            print!("{}", metrics_table(&[&report]));
            Ok(())
        }
        Command::Acf {
            input,
            max_lag,
            downsample: factor,
            archetype,
        } => {
            let series = match input {
                Some(path) => read_series_file(&path).stage("acf")?,
                None => {
                    let gen = lstm_gnb::synth::GeneratorConfig {
                        n_abnormal: 0,
                        ..cfg.generator()
                    };
                    let gen = match archetype {
                        Some(a) => lstm_gnb::synth::GeneratorConfig {
                            archetype: a,
                            ..lstm_gnb::synth::GeneratorConfig::for_archetype(a).with_seed(gen.seed)
                        },
                        None => gen,
                    };
                    let windows = generate(&gen).stage("acf")?;
                    concat_stream(&windows, Label::Normal, gen.sample_interval()).stage("acf")?
                }
            };
            let series = match factor {
                Some(k) => downsample(&series, k).stage("acf")?,
                None => series,
            };
            println!("lag,acf");
            for lag in 0..=max_lag {
                println!("{lag},{:.6}", acf(&series, lag).stage("acf")?);
            }
            Ok(())
        }
        Command::Cv { epochs } => {
            cfg.validate().stage("config")?;
            let prepared = load_windows(&cfg)
                .and_then(|src| prepare(&cfg, &src))
                .stage("preprocess")?;
            let grid = predictor_grid(
                &cfg.predictor(),
                &cfg.cv_hidden_grid,
                &cfg.cv_learning_rate_grid,
                epochs.unwrap_or(cfg.cv_epochs),
            );
            let outcome =
                select_predictor(&prepared.split.normal_train, &grid, cfg.cv_folds, cfg.split_seed)
                    .stage("cv")?;
            let mut csv = String::from("hidden,learning_rate,mean_loss,fold_losses\n");
            for ((c, mean), folds) in outcome.grid.iter().zip(&outcome.mean_scores).zip(&outcome.fold_scores) {
                let folds: Vec<String> = folds.iter().map(|f| format!("{f:.6}")).collect();
                csv.push_str(&format!("{},{},{mean:.6},{}\n", c.hidden, c.learning_rate, folds.join(" ")));
            }
            std::fs::write(out.join("cv_predictor.csv"), &csv)?;
            print!("{csv}");
            let best = outcome.best();
            println!("selected hidden={} learning_rate={}", best.hidden, best.learning_rate);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
