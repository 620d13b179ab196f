//! Feed-forward regression network written from scratch: tanh layers,
//! analytic backpropagation, Adam, and a finite-difference gradient oracle.

mod adam;
pub mod gradcheck;
mod loss;
mod mlp;
mod persist;
mod scaler;
mod train;

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use loss::{loss, loss_gradient, LossKind};
pub use mlp::{init_params, ForwardCache, Layer, MlpArchitecture, MlpParams};
pub use persist::{load_model, model_from_json, model_to_json, save_model, MODEL_SCHEMA_VERSION};
pub use scaler::{LabelMap, Scaler};
pub use train::{evaluate, evaluate_predictions, train, Metrics, Model, SetpointSummary, TrainConfig, TrainHistory};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("loss error: {0}")]
    Loss(String),
    #[error("scaler error: {0}")]
    Scaler(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },
    #[error("model file error: {0}")]
    Persist(String),
}

/// Analytic gradient of the single-sample loss at `(x, label)`.
pub fn sample_gradient(params: &MlpParams, x: &[f64], label: f64, kind: LossKind) -> Result<MlpParams, NnError> {
    let (y, cache) = params.forward(x);
    let upstream = loss_gradient(kind, &[y], &[label])?;
    Ok(params.backward(&cache, upstream[0]))
}

/// Analytic gradient of the batch loss, accumulated over samples.
pub fn batch_gradient(
    params: &MlpParams,
    xs: &[Vec<f64>],
    labels: &[f64],
    kind: LossKind,
) -> Result<MlpParams, NnError> {
    let (preds, caches): (Vec<f64>, Vec<ForwardCache>) = xs.iter().map(|x| params.forward(x)).unzip();
    let upstream = loss_gradient(kind, &preds, labels)?;
    let mut grads = params.zeros_like();
    for (cache, u) in caches.iter().zip(upstream) {
        params.backward_into(cache, u, &mut grads);
    }
    Ok(grads)
}
