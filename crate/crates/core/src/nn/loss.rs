use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    Mae,
    Rmse,
    Msle,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Mse, LossKind::Mae, LossKind::Rmse, LossKind::Msle];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Mae => "mae",
            LossKind::Rmse => "rmse",
            LossKind::Msle => "msle",
        }
    }
}

fn check(predictions: &[f64], labels: &[f64]) -> Result<(), NnError> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(NnError::Loss(format!(
            "need equal non-empty lengths, got {} predictions and {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    Ok(())
}

fn log1p_checked(v: f64) -> Result<f64, NnError> {
    if v <= -1.0 {
        return Err(NnError::Loss(format!("msle needs values > -1, got {v}")));
    }
    Ok(v.ln_1p())
}

/// Batch loss. MSLE uses the `ln(1 + v)` shift on both sides.
pub fn loss(kind: LossKind, predictions: &[f64], labels: &[f64]) -> Result<f64, NnError> {
    check(predictions, labels)?;
    let n = predictions.len() as f64;
    let pairs = predictions.iter().zip(labels);
    Ok(match kind {
        LossKind::Mse => pairs.map(|(p, y)| (p - y).powi(2)).sum::<f64>() / n,
        LossKind::Mae => pairs.map(|(p, y)| (p - y).abs()).sum::<f64>() / n,
        LossKind::Rmse => (pairs.map(|(p, y)| (p - y).powi(2)).sum::<f64>() / n).sqrt(),
        LossKind::Msle => {
            let mut acc = 0.0;
            for (&p, &y) in pairs {
                acc += (log1p_checked(y)? - log1p_checked(p)?).powi(2);
            }
            acc / n
        }
    })
}

/// `∂loss/∂prediction_i` of the batch loss.
///
/// MAE uses subgradient 0 at a zero residual; RMSE is differentiated as a
/// whole-batch quantity and returns zeros when it is exactly 0.
pub fn loss_gradient(kind: LossKind, predictions: &[f64], labels: &[f64]) -> Result<Vec<f64>, NnError> {
    check(predictions, labels)?;
    let n = predictions.len() as f64;
    let pairs = predictions.iter().zip(labels);
    Ok(match kind {
        LossKind::Mse => pairs.map(|(p, y)| 2.0 * (p - y) / n).collect(),
        LossKind::Mae => pairs
            .map(|(p, y)| {
                let r = p - y;
                if r > 0.0 {
                    1.0 / n
                } else if r < 0.0 {
                    -1.0 / n
                } else {
                    0.0
                }
            })
            .collect(),
        LossKind::Rmse => {
            let rmse = loss(LossKind::Rmse, predictions, labels)?;
            if rmse == 0.0 {
                vec![0.0; predictions.len()]
            } else {
                pairs.map(|(p, y)| (p - y) / (n * rmse)).collect()
            }
        }
        LossKind::Msle => {
            let mut out = Vec::with_capacity(predictions.len());
            for (&p, &y) in pairs {
                let diff = log1p_checked(p)? - log1p_checked(y)?;
                out.push(2.0 * diff / ((1.0 + p) * n));
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    #[test]
    fn two_point_case() {
        let (p, y) = ([1.0, 2.0], [1.0, 4.0]);
        assert_eq!(loss(LossKind::Mse, &p, &y).unwrap(), 2.0);
        assert_eq!(loss(LossKind::Mae, &p, &y).unwrap(), 1.0);
        assert!((loss(LossKind::Rmse, &p, &y).unwrap() - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn perfect_predictions_are_zero() {
        let v = [0.1, -0.3, 0.7];
        for kind in LossKind::ALL {
            assert_eq!(loss(kind, &v, &v).unwrap(), 0.0);
            assert!(loss_gradient(kind, &v, &v).unwrap().iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn msle_hand_case_and_domain() {
        assert!((loss(LossKind::Msle, &[0.0], &[E - 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(loss(LossKind::Msle, &[-1.0], &[0.0]).is_err());
        assert!(loss_gradient(LossKind::Msle, &[0.0], &[-2.0]).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(loss(LossKind::Mse, &[], &[]).is_err());
        assert!(loss(LossKind::Mse, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gradients_match_central_differences() {
        let p = [0.31, -0.42, 0.05, 0.6];
        let y = [0.2, -0.1, 0.3, 0.55];
        let h = 1e-6;
        for kind in LossKind::ALL {
            let g = loss_gradient(kind, &p, &y).unwrap();
            for i in 0..p.len() {
                let (mut up, mut dn) = (p, p);
                up[i] += h;
                dn[i] -= h;
                let fd = (loss(kind, &up, &y).unwrap() - loss(kind, &dn, &y).unwrap()) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-8, "{kind:?} {i}: {fd} vs {}", g[i]);
            }
        }
    }
}
