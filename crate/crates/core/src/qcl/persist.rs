// SPDX-License-Identifier: Apache-2.0

//! JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcl::ansatz::AnsatzConfig;
use crate::qcl::train::{ModelMetadata, TrainedModel};
use crate::scalar::Real;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    #[serde(rename = "L")]
    length: usize,
    #[serde(rename = "D")]
    layers: usize,
    d: usize,
    delta: f64,
    #[serde(rename = "T")]
    time: f64,
    seed: u64,
    couplings: Vec<f64>,
    theta: Vec<f64>,
    a: f64,
    final_loss: f64,
    alpha: [f64; 5],
    dataset_hash: String,
    metadata: ModelMetadata,
}

pub fn model_to_json<T: Real>(model: &TrainedModel<T>) -> Result<String> {
    model.validate()?;
    let f = |v: &[T]| v.iter().map(|t| t.as_f64()).collect::<Vec<_>>();
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        length: model.config.num_qubits,
        layers: model.config.layers,
        d: model.steps,
        delta: model.delta.as_f64(),
        time: model.config.time.as_f64(),
        seed: model.config.seed,
        couplings: f(&model.config.couplings),
        theta: f(&model.theta),
        a: model.a.as_f64(),
        final_loss: model.final_loss.as_f64(),
        alpha: model.metadata.weights.0,
        dataset_hash: model.metadata.dataset_hash.clone(),
        metadata: model.metadata.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json<T: Real>(text: &str) -> Result<TrainedModel<T>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Parse("model file lacks format_version".into()))?;
    if found != FORMAT_VERSION as u64 {
        return Err(Error::Version {
            found: found.min(u32::MAX as u64) as u32,
            supported: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    let g = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
    let config = AnsatzConfig::new(
        file.length,
        file.layers,
        g(&file.couplings),
        T::lit(file.time),
        file.seed,
    )?;
    let model = TrainedModel {
        config,
        theta: g(&file.theta),
        a: T::lit(file.a),
        steps: file.d,
        delta: T::lit(file.delta),
        final_loss: T::lit(file.final_loss),
        metadata: file.metadata,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model<T: Real>(model: &TrainedModel<T>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model<T: Real>(path: &Path) -> Result<TrainedModel<T>> {
    model_from_json(&std::fs::read_to_string(path)?)
}
