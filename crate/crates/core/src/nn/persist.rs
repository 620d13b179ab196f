//! Self-describing JSON model document. Floats are written with shortest
//! round-trip decimal representations, so a reload is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Layer, MlpArchitecture, MlpParams};
use super::scaler::Scaler;
use super::train::Model;
use super::NnError;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDocument {
    fan_in: usize,
    fan_out: usize,
    /// `fan_in` rows of `fan_out` weights.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    schema_version: u32,
    activation: String,
    architecture: MlpArchitecture,
    scaler: Scaler,
    layers: Vec<LayerDocument>,
}

pub fn model_to_json(model: &Model) -> String {
    let doc = ModelDocument {
        schema_version: MODEL_SCHEMA_VERSION,
        activation: "tanh".into(),
        architecture: model.architecture.clone(),
        scaler: model.scaler.clone(),
        layers: model
            .params
            .layers
            .iter()
            .map(|l| LayerDocument {
                fan_in: l.fan_in,
                fan_out: l.fan_out,
                weights: l.weights.chunks(l.fan_out).map(<[f64]>::to_vec).collect(),
                bias: l.bias.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

pub fn model_from_json(text: &str) -> Result<Model, NnError> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| NnError::Persist(e.to_string()))?;
    if doc.schema_version != MODEL_SCHEMA_VERSION {
        return Err(NnError::Persist(format!("unsupported schema_version {}", doc.schema_version)));
    }
    if doc.activation != "tanh" {
        return Err(NnError::Persist(format!("unsupported activation {:?}", doc.activation)));
    }
    let dims = doc.architecture.layer_dims();
    if dims.len() != doc.layers.len() {
        return Err(NnError::Persist("layer count does not match architecture".into()));
    }
    let mut layers = Vec::with_capacity(dims.len());
    for ((fan_in, fan_out), l) in dims.into_iter().zip(doc.layers) {
        let shape_ok = l.fan_in == fan_in
            && l.fan_out == fan_out
            && l.weights.len() == fan_in
            && l.weights.iter().all(|r| r.len() == fan_out)
            && l.bias.len() == fan_out;
        if !shape_ok {
            return Err(NnError::Persist(format!("layer {fan_in}x{fan_out} has inconsistent shapes")));
        }
        layers.push(Layer { fan_in, fan_out, weights: l.weights.concat(), bias: l.bias });
    }
    if doc.scaler.dim() != doc.architecture.input_dim {
        return Err(NnError::Persist("scaler width does not match input_dim".into()));
    }
    Ok(Model { architecture: doc.architecture, scaler: doc.scaler, params: MlpParams { layers } })
}

pub fn save_model(model: &Model, path: &Path) -> Result<(), NnError> {
    std::fs::write(path, model_to_json(model) + "\n").map_err(|e| NnError::Persist(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<Model, NnError> {
    let text = std::fs::read_to_string(path).map_err(|e| NnError::Persist(format!("{}: {e}", path.display())))?;
    model_from_json(&text)
}
