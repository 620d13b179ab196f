use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::{self, stream};

/// Dense feed-forward layout with `tanh` on every layer, output layer included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpArchitecture {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub output_dim: usize,
}

impl MlpArchitecture {
    pub fn new(input_dim: usize, hidden_layers: Vec<usize>) -> Self {
        Self { input_dim, hidden_layers, output_dim: 1 }
    }

    /// 32 → 20 → 1.
    pub fn baseline() -> Self {
        Self::new(32, vec![20])
    }

    /// `(fan_in, fan_out)` per layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let widths: Vec<usize> = std::iter::once(self.input_dim)
            .chain(self.hidden_layers.iter().copied())
            .chain(std::iter::once(self.output_dim))
            .collect();
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.input_dim == 0 {
            out.push("input_dim must be >= 1".into());
        }
        if self.hidden_layers.contains(&0) {
            out.push("hidden layer widths must be >= 1".into());
        }
        if self.output_dim != 1 {
            out.push(format!("output_dim must be 1, got {}", self.output_dim));
        }
        out
    }
}

/// Weights are stored row-major as `fan_in × fan_out`: `weights[i * fan_out + j]`
/// connects input `i` to unit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self { fan_in, fan_out, weights: vec![0.0; fan_in * fan_out], bias: vec![0.0; fan_out] }
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.fan_out + j]
    }
}

/// Parameters of every layer. The same shape doubles as a gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

/// Pre- and post-activation values of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[l + 1]` is the output of layer `l`.
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> f64 {
        self.activations.last().map_or(0.0, |a| a[0])
    }
}

impl MlpParams {
    pub fn zeros(arch: &MlpArchitecture) -> Self {
        Self { layers: arch.layer_dims().into_iter().map(|(i, o)| Layer::zeros(i, o)).collect() }
    }

    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(|l| Layer::zeros(l.fan_in, l.fan_out)).collect() }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All parameters in a fixed order: per layer, weights then biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        self.values_mut().for_each(|v| *v *= factor);
    }

    pub fn forward(&self, x: &[f64]) -> (f64, ForwardCache) {
        assert_eq!(x.len(), self.input_dim(), "input width mismatch");
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        activations.push(x.to_vec());
        for layer in &self.layers {
            let input = activations.last().expect("non-empty");
            let mut z = layer.bias.clone();
            for (i, &xi) in input.iter().enumerate() {
                let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                for (zj, &w) in z.iter_mut().zip(row) {
                    *zj += xi * w;
                }
            }
            activations.push(z.iter().map(|v| v.tanh()).collect());
            pre_activations.push(z);
        }
        let cache = ForwardCache { activations, pre_activations };
        (cache.output(), cache)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.forward(x).0
    }

    /// Adds `∂L/∂θ` to `grads`, given `upstream = ∂L/∂y` for this sample's output.
    pub fn backward_into(&self, cache: &ForwardCache, upstream: f64, grads: &mut MlpParams) {
        let last = self.layers.len() - 1;
        let y = cache.activations[last + 1][0];
        let mut delta = vec![upstream * (1.0 - y * y)];
        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let input = &cache.activations[l];
            let g = &mut grads.layers[l];
            for (i, &xi) in input.iter().enumerate() {
                let row = &mut g.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                for (gw, &d) in row.iter_mut().zip(&delta) {
                    *gw += xi * d;
                }
            }
            for (gb, &d) in g.bias.iter_mut().zip(&delta) {
                *gb += d;
            }
            if l > 0 {
                delta = (0..layer.fan_in)
                    .map(|i| {
                        let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                        let back: f64 = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                        back * (1.0 - input[i] * input[i])
                    })
                    .collect();
            }
        }
    }

    pub fn backward(&self, cache: &ForwardCache, upstream: f64) -> MlpParams {
        let mut grads = self.zeros_like();
        self.backward_into(cache, upstream, &mut grads);
        grads
    }
}

/// Glorot-uniform weights in `±√(6 / (fan_in + fan_out))`, zero biases.
pub fn init_params(arch: &MlpArchitecture, seed: u64) -> MlpParams {
    let mut rng = seed::rng_for(seed, stream::INIT, 0);
    let mut params = MlpParams::zeros(arch);
    for layer in &mut params.layers {
        let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
        for w in &mut layer.weights {
            *w = rng.random_range(-limit..limit);
        }
    }
    params
}
