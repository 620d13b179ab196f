use serde::{Deserialize, Serialize};

use super::NnError;
use crate::dataset::{Dataset, Sample};

/// Affine map between °C labels and the network's output space.
/// The 30–45 °C protocol maps to ±0.75, leaving headroom inside tanh's range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    pub center_c: f64,
    pub scale_c: f64,
}

impl Default for LabelMap {
    fn default() -> Self {
        Self { center_c: 37.5, scale_c: 10.0 }
    }
}

impl LabelMap {
    pub fn normalize(&self, label_c: f64) -> f64 {
        (label_c - self.center_c) / self.scale_c
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        y * self.scale_c + self.center_c
    }
}

/// Per-feature standardization fitted on the training set, plus the label map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub label: LabelMap,
}

impl Scaler {
    /// Population mean and standard deviation of each reading column.
    pub fn fit(train: &Dataset) -> Result<Self, NnError> {
        let n = train.len() as f64;
        let dim = train.arity();
        let mut means = vec![0.0; dim];
        for s in train.samples() {
            for (m, r) in means.iter_mut().zip(&s.readings) {
                *m += r;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; dim];
        for s in train.samples() {
            for ((v, r), m) in stds.iter_mut().zip(&s.readings).zip(&means) {
                *v += (r - m).powi(2);
            }
        }
        for (j, v) in stds.iter_mut().enumerate() {
            *v = (*v / n).sqrt();
            if !(*v > 1e-12 * means[j].abs().max(1.0)) {
                return Err(NnError::Scaler(format!("feature {j} has zero variance")));
            }
        }
        Ok(Self { means, stds, label: LabelMap::default() })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, readings: &[f64]) -> Vec<f64> {
        readings.iter().zip(self.means.iter().zip(&self.stds)).map(|(r, (m, s))| (r - m) / s).collect()
    }

    pub fn inverse_transform(&self, features: &[f64]) -> Vec<f64> {
        features.iter().zip(self.means.iter().zip(&self.stds)).map(|(x, (m, s))| x * s + m).collect()
    }

    /// Normalized features and label of one sample.
    pub fn apply(&self, sample: &Sample) -> (Vec<f64>, f64) {
        (self.transform(&sample.readings), self.label.normalize(sample.label_c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Provenance;

    fn ds() -> Dataset {
        let samples = (0..20)
            .map(|i| Sample {
                readings: (0..4).map(|j| 30.0 + (i * (j + 1)) as f64 * 0.37 + (j as f64).sin()).collect(),
                label_c: 30.0 + (i % 16) as f64,
                setpoint_index: i % 16,
                sample_index: i,
            })
            .collect();
        Dataset::new(samples, Provenance::Ingested { source: "t".into() }).unwrap()
    }

    #[test]
    fn standardizes_training_features() {
        let d = ds();
        let s = Scaler::fit(&d).unwrap();
        let xs: Vec<Vec<f64>> = d.samples().iter().map(|x| s.transform(&x.readings)).collect();
        for j in 0..4 {
            let col: Vec<f64> = xs.iter().map(|x| x[j]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
            assert!(mean.abs() < 1e-9);
            assert!((std - 1.0).abs() < 1e-9);
        }
        let x = &d.samples()[3].readings;
        let back = s.inverse_transform(&s.transform(x));
        assert!(back.iter().zip(x).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn label_map() {
        let m = LabelMap::default();
        assert_eq!(m.normalize(37.5), 0.0);
        assert_eq!(m.normalize(45.0), 0.75);
        assert_eq!(m.normalize(30.0), -0.75);
        assert!((m.denormalize(m.normalize(41.3)) - 41.3).abs() < 1e-12);
    }

    #[test]
    fn constant_feature_is_rejected() {
        let samples = (0..5)
            .map(|i| Sample { readings: vec![i as f64, 3.0], label_c: 30.0, setpoint_index: 0, sample_index: i })
            .collect();
        let d = Dataset::new(samples, Provenance::Ingested { source: "t".into() }).unwrap();
        assert!(matches!(Scaler::fit(&d), Err(NnError::Scaler(m)) if m.contains("feature 1")));
    }
}
