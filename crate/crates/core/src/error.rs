use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid downsampling factor {factor} for series of length {len}")]
    InvalidFactor { factor: usize, len: usize },

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("invalid lag {lag} for series of length {len}")]
    InvalidLag { lag: usize, len: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid dropout rate {0}; must lie in [0, 1)")]
    InvalidRate(f64),

    #[error("forward cache does not match the window or parameters: {0}")]
    CacheMismatch(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    DivergedTraining { epoch: usize },

    #[error("class {0} absent from training data")]
    MissingClass(u8),

    #[error("error dataset has no features")]
    EmptyFeatures,

    #[error("beta must be positive, got {0}")]
    InvalidBeta(f64),

    #[error("invalid folds: {0}")]
    InvalidFolds(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error("model file version {found} not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("stage={stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Attach a pipeline stage name to an error.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
