use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::ClassifierConfig;
use crate::error::{Error, Result};
use crate::lstm::PredictorConfig;
use crate::series::SplitRatios;
use crate::synth::{Archetype, GeneratorConfig};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LGNB_OUT_DIR";

/// Flat experiment configuration. Every key is optional; unknown keys are
/// rejected when parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Generator used when no `series_csv` is given.
    pub archetype: Archetype,
    /// `timestamp,value` CSV; requires `labels_csv`.
    pub series_csv: Option<PathBuf>,
    /// `window_id,label` CSV over the windows cut from `series_csv`.
    pub labels_csv: Option<PathBuf>,

    pub n_normal: usize,
    pub n_abnormal: usize,
    /// Overrides the archetype's default noise level.
    pub noise_sigma: Option<f64>,
    pub anomaly_amplitude: Option<f64>,
    pub generator_seed: u64,

    /// Block-mean factor; defaults to 8 for power and 1 otherwise.
    pub downsample: Option<usize>,
    /// Window length after downsampling (CSV sources only).
    pub window_len: usize,
    pub stride: usize,

    pub split_train: f64,
    pub split_valid: f64,
    pub split_test: f64,
    pub split_seed: u64,
    /// Share of each class's error vectors used to fit naive Bayes.
    pub error_train_fraction: f64,
    pub error_split_seed: u64,
    pub variance_floor: f64,
    pub beta: f64,

    pub seed: u64,
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub l2: f64,
    pub patience: Option<usize>,
    pub baseline_hidden: usize,
    pub baseline_learning_rate: f64,
    pub baseline_patience: Option<usize>,

    /// Run 5-fold selection over the grids before the final fits.
    pub cv: bool,
    pub cv_folds: usize,
    pub cv_epochs: usize,
    pub cv_hidden_grid: Vec<usize>,
    pub cv_learning_rate_grid: Vec<f64>,

    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            archetype: Archetype::Power,
            series_csv: None,
            labels_csv: None,
            n_normal: 500,
            n_abnormal: 60,
            noise_sigma: None,
            anomaly_amplitude: None,
            generator_seed: 0,
            downsample: None,
            window_len: 84,
            stride: 84,
            split_train: 0.8,
            split_valid: 0.1,
            split_test: 0.1,
            split_seed: 1,
            error_train_fraction: 0.8,
            error_split_seed: 2,
            variance_floor: crate::bayes::DEFAULT_VARIANCE_FLOOR,
            beta: 1.0,
            seed: 7,
            hidden: 16,
            learning_rate: 0.05,
            epochs: 1000,
            dropout: 0.05,
            l2: 1e-4,
            patience: Some(10),
            baseline_hidden: 16,
            baseline_learning_rate: 0.05,
            baseline_patience: Some(10),
            cv: false,
            cv_folds: 5,
            cv_epochs: 200,
            cv_hidden_grid: vec![16, 32, 64],
            cv_learning_rate_grid: vec![0.05],
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Defaults for one generator archetype with every seed set from `seed`.
    pub fn for_archetype(archetype: Archetype, seed: u64) -> Self {
        Self {
            archetype,
            ..Self::default()
        }
        .with_seed(seed)
    }

    /// Derives the generator, split, error-split and model seeds from one
    /// value.
    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            generator_seed: seed,
            split_seed: seed.wrapping_add(1),
            error_split_seed: seed.wrapping_add(2),
            seed: seed.wrapping_add(3),
            ..self
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        // relative data paths resolve against the config file
        if let Some(dir) = path.parent() {
            for p in [&mut cfg.series_csv, &mut cfg.labels_csv].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ratios(&self) -> SplitRatios {
        SplitRatios {
            train: self.split_train,
            valid: self.split_valid,
            test: self.split_test,
        }
    }

    pub fn downsample_factor(&self) -> usize {
        self.downsample.unwrap_or(match (&self.series_csv, self.archetype) {
            (None, Archetype::Power) => 8,
            _ => 1,
        })
    }

    pub fn generator(&self) -> GeneratorConfig {
        let mut g = GeneratorConfig::for_archetype(self.archetype).with_seed(self.generator_seed);
        g.n_normal = self.n_normal;
        g.n_abnormal = self.n_abnormal;
        if let Some(s) = self.noise_sigma {
            g.noise_sigma = s;
        }
        g.anomaly_amplitude = self.anomaly_amplitude.or(g.anomaly_amplitude);
        g
    }

    pub fn predictor(&self) -> PredictorConfig {
        PredictorConfig {
            hidden: self.hidden,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            dropout: self.dropout,
            l2: self.l2,
            seed: self.seed,
            forget_bias: 1.0,
            patience: self.patience,
        }
    }

    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            hidden: self.baseline_hidden,
            learning_rate: self.baseline_learning_rate,
            epochs: self.epochs,
            dropout: self.dropout,
            l2: self.l2,
            seed: self.seed.wrapping_add(100),
            patience: self.baseline_patience,
        }
    }

    /// Explicit `out_dir`, else the environment default, else `./out`.
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn validate(&self) -> Result<()> {
        self.ratios().validate()?;
        match (&self.series_csv, &self.labels_csv) {
            (Some(s), Some(l)) => {
                for p in [s, l] {
                    if !p.exists() {
                        return Err(Error::Config(format!("{} does not exist", p.display())));
                    }
                }
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Config("series_csv and labels_csv go together".into()))
            }
            (None, None) => self.generator().validate()?,
        }
        if self.downsample_factor() == 0 {
            return Err(Error::Config("downsample factor must be at least 1".into()));
        }
        if self.window_len < 2 || self.stride == 0 {
            return Err(Error::Config("window_len must be >= 2 and stride >= 1".into()));
        }
        if !(self.error_train_fraction > 0.0 && self.error_train_fraction < 1.0) {
            return Err(Error::Config("error_train_fraction must lie in (0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidRate(self.dropout));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidBeta(self.beta));
        }
        if self.hidden == 0 || self.baseline_hidden == 0 {
            return Err(Error::Config("hidden sizes must be positive".into()));
        }
        if self.cv_hidden_grid.is_empty() || self.cv_learning_rate_grid.is_empty() {
            return Err(Error::Config("cross-validation grids must be non-empty".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidFolds(format!("{} folds", self.cv_folds)));
        }
        Ok(())
    }
}
