//! Versioned JSON model files.
//!
//! Every file is an object `{"format_version": N, "kind": "...", "model": {...}}`.
//! Floats are written in shortest round-trip form, so a save/load cycle
//! reproduces every parameter bit for bit.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::{LstmClassifierParams, MlpParams};
use crate::bayes::GaussNBModel;
use crate::error::{Error, Result};
use crate::lstm::StackedLstmParams;
use crate::series::NormalizationParams;

pub const FORMAT_VERSION: u32 = 1;

/// A model that can be written to and read from a model file.
pub trait ModelFile: Serialize + DeserializeOwned {
    const KIND: &'static str;

    /// Structural checks run after parsing.
    fn check(&self) -> Result<()>;
}

impl ModelFile for StackedLstmParams {
    const KIND: &'static str = "lstm_predictor";

    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl ModelFile for LstmClassifierParams {
    const KIND: &'static str = "lstm_classifier";

    fn check(&self) -> Result<()> {
        self.stack.validate()
    }
}

impl ModelFile for MlpParams {
    const KIND: &'static str = "mlp";

    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl ModelFile for GaussNBModel {
    const KIND: &'static str = "gauss_nb";

    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl ModelFile for NormalizationParams {
    const KIND: &'static str = "normalization";

    fn check(&self) -> Result<()> {
        NormalizationParams::new(self.min, self.max).map(|_| ())
    }
}

#[derive(Serialize)]
struct Envelope<'a, M> {
    format_version: u32,
    kind: &'a str,
    model: &'a M,
}

#[derive(Deserialize)]
struct Header {
    format_version: Option<u32>,
    kind: Option<String>,
}

fn format_err(location: impl Into<String>, message: impl ToString) -> Error {
    Error::Format {
        location: location.into(),
        message: message.to_string(),
    }
}

pub fn to_json<M: ModelFile>(model: &M) -> String {
    let mut text = serde_json::to_string_pretty(&Envelope {
        format_version: FORMAT_VERSION,
        kind: M::KIND,
        model,
    })
    .expect("models serialize");
    text.push('\n');
    text
}

pub fn from_json<M: ModelFile>(text: &str) -> Result<M> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        format_err(format!("line {} column {}", e.line(), e.column()), e)
    })?;
    let header: Header =
        serde_json::from_value(value.clone()).map_err(|e| format_err("header", e))?;
    let found = header
        .format_version
        .ok_or_else(|| format_err("format_version", "missing"))?;
    if found != FORMAT_VERSION {
        return Err(Error::Version {
            found,
            expected: FORMAT_VERSION,
        });
    }
    match header.kind.as_deref() {
        Some(k) if k == M::KIND => {}
        other => {
            return Err(format_err(
                "kind",
                format!("expected '{}', found {:?}", M::KIND, other),
            ))
        }
    }
    let body = value
        .get_mut("model")
        .map(serde_json::Value::take)
        .ok_or_else(|| format_err("model", "missing"))?;
    let model: M = serde_json::from_value(body).map_err(|e| format_err("model", e))?;
    model.check().map_err(|e| format_err("model", e))?;
    Ok(model)
}

pub fn save_model<M: ModelFile>(model: &M, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(model))?;
    Ok(())
}

pub fn load_model<M: ModelFile>(path: &Path) -> Result<M> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}
