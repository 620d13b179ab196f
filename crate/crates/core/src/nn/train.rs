use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::{loss, loss_gradient, LossKind};
use super::mlp::{init_params, ForwardCache, MlpArchitecture, MlpParams};
use super::scaler::{LabelMap, Scaler};
use super::NnError;
use crate::dataset::Dataset;
use crate::seed::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub loss_kind: LossKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss_kind: LossKind::Mse,
            learning_rate: 0.01,
            epochs: 300,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init_seed: 42,
            shuffle_seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }

    /// Violations that do not depend on the training set size.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.learning_rate > 0.0) {
            out.push(format!("learning_rate ({}) must be > 0", self.learning_rate));
        }
        if self.epochs < 1 {
            out.push("epochs must be >= 1".into());
        }
        if self.batch_size < 1 {
            out.push("batch_size must be >= 1".into());
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            out.push("beta1 and beta2 must lie in [0, 1)".into());
        }
        if !(self.epsilon > 0.0) {
            out.push("epsilon must be > 0".into());
        }
        out
    }
}

/// Per-epoch losses in normalized label space, recorded after each epoch's last update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub loss_kind: LossKind,
    pub train_loss: Vec<f64>,
    pub test_loss: Vec<f64>,
    pub train_mse: Vec<f64>,
    pub test_mse: Vec<f64>,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }
}

/// A trained network together with the preprocessing it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub architecture: MlpArchitecture,
    pub scaler: Scaler,
    pub params: MlpParams,
}

impl Model {
    pub fn predict_normalized(&self, readings: &[f64]) -> f64 {
        self.params.predict(&self.scaler.transform(readings))
    }

    /// Prediction in °C; always inside the image of tanh under the label map.
    pub fn predict_c(&self, readings: &[f64]) -> f64 {
        self.scaler.label.denormalize(self.predict_normalized(readings))
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Vec<f64> {
        ds.samples().iter().map(|s| self.predict_c(&s.readings)).collect()
    }
}

struct Prepared {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

fn prepare(ds: &Dataset, scaler: &Scaler) -> Prepared {
    let (features, labels) = ds.samples().iter().map(|s| scaler.apply(s)).unzip();
    Prepared { features, labels }
}

fn predictions(params: &MlpParams, data: &Prepared) -> Vec<f64> {
    data.features.iter().map(|x| params.predict(x)).collect()
}

/// Mini-batch Adam on the training set; the scaler is fitted on `train` only.
pub fn train(
    train: &Dataset,
    test: &Dataset,
    arch: &MlpArchitecture,
    config: &TrainConfig,
) -> Result<(Model, TrainHistory), NnError> {
    let mut problems = arch.violations();
    problems.extend(config.violations());
    if config.batch_size > train.len() {
        problems.push(format!("batch_size ({}) exceeds training set size ({})", config.batch_size, train.len()));
    }
    if arch.input_dim != train.arity() || arch.input_dim != test.arity() {
        problems.push(format!(
            "input_dim {} does not match dataset arity (train {}, test {})",
            arch.input_dim,
            train.arity(),
            test.arity()
        ));
    }
    if !problems.is_empty() {
        return Err(NnError::Config(problems.join("; ")));
    }

    let scaler = Scaler::fit(train)?;
    let train_data = prepare(train, &scaler);
    let test_data = prepare(test, &scaler);
    let mut params = init_params(arch, config.init_seed);
    let mut state = AdamState::new(&params);
    let adam = config.adam();
    let mut history = TrainHistory {
        loss_kind: config.loss_kind,
        train_loss: Vec::with_capacity(config.epochs),
        test_loss: Vec::with_capacity(config.epochs),
        train_mse: Vec::with_capacity(config.epochs),
        test_mse: Vec::with_capacity(config.epochs),
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grads = params.zeros_like();
    let mut caches: Vec<ForwardCache> = Vec::with_capacity(config.batch_size);
    let mut batch_preds = Vec::with_capacity(config.batch_size);
    let mut batch_labels = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut seed::rng_for(config.shuffle_seed, stream::BATCH_ORDER, epoch as u64));
        for batch in order.chunks(config.batch_size) {
            caches.clear();
            batch_preds.clear();
            batch_labels.clear();
            for &i in batch {
                let (y, cache) = params.forward(&train_data.features[i]);
                batch_preds.push(y);
                batch_labels.push(train_data.labels[i]);
                caches.push(cache);
            }
            let upstream = loss_gradient(config.loss_kind, &batch_preds, &batch_labels)?;
            grads.values_mut().for_each(|g| *g = 0.0);
            for (cache, &u) in caches.iter().zip(&upstream) {
                params.backward_into(cache, u, &mut grads);
            }
            adam_step(&mut params, &grads, &mut state, &adam);
        }

        let train_preds = predictions(&params, &train_data);
        let test_preds = predictions(&params, &test_data);
        let train_loss = loss(config.loss_kind, &train_preds, &train_data.labels)?;
        let test_loss = loss(config.loss_kind, &test_preds, &test_data.labels)?;
        if !train_loss.is_finite() || !test_loss.is_finite() || !params.all_finite() {
            return Err(NnError::Diverged { epoch });
        }
        history.train_loss.push(train_loss);
        history.test_loss.push(test_loss);
        history.train_mse.push(loss(LossKind::Mse, &train_preds, &train_data.labels)?);
        history.test_mse.push(loss(LossKind::Mse, &test_preds, &test_data.labels)?);
    }

    let model = Model { architecture: arch.clone(), scaler, params };
    Ok((model, history))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetpointSummary {
    pub set_c: f64,
    pub count: usize,
    pub mean_prediction_c: f64,
    pub mean_reading_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae_c: f64,
    pub rmse_c: f64,
    pub max_abs_err_c: f64,
    pub mse_normalized: f64,
    pub per_setpoint: Vec<SetpointSummary>,
}

/// Error metrics of externally supplied °C predictions against `test` labels.
pub fn evaluate_predictions(test: &Dataset, predictions_c: &[f64], label: &LabelMap) -> Result<Metrics, NnError> {
    if test.is_empty() || predictions_c.len() != test.len() {
        return Err(NnError::Loss(format!("{} predictions for {} samples", predictions_c.len(), test.len())));
    }
    let n = test.len() as f64;
    let errors: Vec<f64> = test.samples().iter().zip(predictions_c).map(|(s, p)| p - s.label_c).collect();
    let mae_c = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let rmse_c = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let max_abs_err_c = errors.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let mse_normalized = errors.iter().map(|e| (e / label.scale_c).powi(2)).sum::<f64>() / n;

    let mut groups: BTreeMap<usize, (f64, usize, f64, f64)> = BTreeMap::new();
    for (s, p) in test.samples().iter().zip(predictions_c) {
        let g = groups.entry(s.setpoint_index).or_insert((s.label_c, 0, 0.0, 0.0));
        g.1 += 1;
        g.2 += p;
        g.3 += s.readings.iter().sum::<f64>() / s.readings.len() as f64;
    }
    let per_setpoint = groups
        .into_values()
        .map(|(set_c, count, pred_sum, read_sum)| SetpointSummary {
            set_c,
            count,
            mean_prediction_c: pred_sum / count as f64,
            mean_reading_c: read_sum / count as f64,
        })
        .collect();
    Ok(Metrics { mae_c, rmse_c, max_abs_err_c, mse_normalized, per_setpoint })
}

pub fn evaluate(model: &Model, test: &Dataset) -> Result<Metrics, NnError> {
    evaluate_predictions(test, &model.predict_dataset(test), &model.scaler.label)
}
