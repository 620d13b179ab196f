use serde::{Deserialize, Serialize};

use super::MlpParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: MlpParams,
    pub v: MlpParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self { m: params.zeros_like(), v: params.zeros_like(), t: 0 }
    }
}

/// One bias-corrected Adam update over flat slices. `t` is the step count after
/// this update.
pub fn adam_update(theta: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &AdamConfig) {
    debug_assert!(theta.len() == grads.len() && m.len() == grads.len() && v.len() == grads.len());
    let t = t.min(i32::MAX as u64) as i32;
    let m_correction = 1.0 - cfg.beta1.powi(t);
    let v_correction = 1.0 - cfg.beta2.powi(t);
    for i in 0..theta.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / m_correction;
        let v_hat = v[i] / v_correction;
        theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

pub fn adam_step(params: &mut MlpParams, grads: &MlpParams, state: &mut AdamState, cfg: &AdamConfig) {
    state.t += 1;
    let t = state.t;
    for (((p, g), m), v) in
        params.layers.iter_mut().zip(&grads.layers).zip(state.m.layers.iter_mut()).zip(state.v.layers.iter_mut())
    {
        adam_update(&mut p.weights, &g.weights, &mut m.weights, &mut v.weights, t, cfg);
        adam_update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias, t, cfg);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::MlpArchitecture;

    #[test]
    fn first_step_by_hand() {
        let (mut theta, mut m, mut v) = ([0.0], [0.0], [0.0]);
        adam_update(&mut theta, &[2.0], &mut m, &mut v, 1, &AdamConfig::default());
        assert!((m[0] - 0.2).abs() < 1e-15);
        assert!((v[0] - 0.004).abs() < 1e-15);
        assert!((theta[0] - (-0.01 * 2.0 / (2.0 + 1e-8))).abs() < 1e-12);
        assert!((theta[0] - (-0.00999999995)).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let (mut theta, mut m, mut v) = ([0.7], [0.0], [0.0]);
        adam_update(&mut theta, &[0.0], &mut m, &mut v, 1, &AdamConfig::default());
        assert_eq!(theta[0], 0.7);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        let cfg = AdamConfig::default();
        for g in [-1e3, -0.5, 1e-3, 3.0, 42.0] {
            let (mut theta, mut m, mut v) = ([0.0], [0.0], [0.0]);
            adam_update(&mut theta, &[g], &mut m, &mut v, 1, &cfg);
            assert!((theta[0].abs() - cfg.learning_rate).abs() < 1e-6 * cfg.learning_rate / g.abs().min(1.0));
            assert_eq!(theta[0].signum(), -g.signum());
        }
    }

    #[test]
    fn step_counter_increments() {
        let arch = MlpArchitecture::new(2, vec![3]);
        let mut p = MlpParams::zeros(&arch);
        let g = p.zeros_like();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, &AdamConfig::default());
        adam_step(&mut p, &g, &mut s, &AdamConfig::default());
        assert_eq!(s.t, 2);
    }
}
