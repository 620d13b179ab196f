//! Central-difference gradient oracle, kept independent of the analytic
//! backward pass: it only ever calls `forward` and `loss`.

use super::loss::{loss, LossKind};
use super::mlp::MlpParams;
use super::NnError;

/// Denominator floor for relative errors. Central differences at h = 1e-5 resolve
/// a gradient component only to a few 1e-11 absolute, so components below this
/// floor are effectively held to an absolute tolerance instead.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-5;

/// `(f(θ + h·eᵢ) − f(θ − h·eᵢ)) / 2h` for every parameter `i`.
pub fn finite_diff_with<F>(params: &MlpParams, h: f64, f: F) -> MlpParams
where
    F: Fn(&MlpParams) -> f64,
{
    assert!(h > 0.0, "step must be positive");
    let mut probe = params.clone();
    let mut out = params.zeros_like();
    let n = params.len();
    for k in 0..n {
        let original = *params.values().nth(k).expect("index in range");
        set(&mut probe, k, original + h);
        let up = f(&probe);
        set(&mut probe, k, original - h);
        let down = f(&probe);
        set(&mut probe, k, original);
        set(&mut out, k, (up - down) / (2.0 * h));
    }
    out
}

fn set(params: &mut MlpParams, k: usize, v: f64) {
    *params.values_mut().nth(k).expect("index in range") = v;
}

/// Numerical gradient of the single-sample loss.
pub fn finite_diff_gradient(
    params: &MlpParams,
    x: &[f64],
    label: f64,
    kind: LossKind,
    h: f64,
) -> Result<MlpParams, NnError> {
    loss(kind, &[params.predict(x)], &[label])?;
    Ok(finite_diff_with(params, h, |p| loss(kind, &[p.predict(x)], &[label]).unwrap_or(f64::NAN)))
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Largest per-parameter relative error between two gradients.
pub fn max_relative_error(a: &MlpParams, b: &MlpParams) -> f64 {
    a.values().zip(b.values()).map(|(x, y)| relative_error(*x, *y)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::Layer;

    #[test]
    fn quadratic_in_one_parameter() {
        let p = MlpParams { layers: vec![Layer { fan_in: 1, fan_out: 1, weights: vec![0.7], bias: vec![0.0] }] };
        let g = finite_diff_with(&p, 1e-4, |q| 3.0 * q.layers[0].weights[0].powi(2));
        assert!((g.layers[0].weights[0] - 4.2).abs() < 1e-9);
        assert!(g.layers[0].bias[0].abs() < 1e-12);
    }

    #[test]
    fn floor_applies_to_tiny_components() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((relative_error(1e-12, 0.0) - 1e-7).abs() < 1e-19);
    }
}
