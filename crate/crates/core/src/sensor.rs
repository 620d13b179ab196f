//! Measurement models for the two sensor families on the array.
//!
//! Digital sensors add a fixed bias and Gaussian noise, then round to a fixed
//! resolution. Analog sensors push the biased, noisy temperature through a
//! thermistor divider and an ADC before converting back with Steinhart–Hart.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plate::{self, GridPosition, PlateProfile, GRID_COLS, GRID_ROWS};
use crate::seed::{self, stream};
use crate::thermistor::{self, ThermistorCoefficients, ThermistorError};

pub const ARRAY_SIZE: usize = GRID_ROWS * GRID_COLS;

/// Ids `0..ANALOG_COUNT` are analog (rows 1–2); the rest are digital (rows 3–4).
pub const ANALOG_COUNT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("sensor {id} is {actual}, expected {expected}")]
    WrongKind { id: usize, expected: &'static str, actual: &'static str },
    #[error("sensor {id}: {source}")]
    Thermistor {
        id: usize,
        #[source]
        source: ThermistorError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorKind {
    Digital { step_c: f64 },
    Analog { adc_bits: u32, divider_ref_ohms: f64 },
}

impl SensorKind {
    pub fn name(&self) -> &'static str {
        match self {
            SensorKind::Digital { .. } => "digital",
            SensorKind::Analog { .. } => "analog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub id: usize,
    pub kind: SensorKind,
    pub position: GridPosition,
    pub bias_c: f64,
    pub noise_sigma_c: f64,
}

/// Per-family defaults used when building an array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorDefaults {
    pub digital_noise_sigma_c: f64,
    pub analog_noise_sigma_c: f64,
    pub digital_step_c: f64,
    pub digital_bias_range_c: (f64, f64),
    pub analog_bias_range_c: (f64, f64),
    pub adc_bits: u32,
    pub divider_ref_ohms: f64,
}

impl Default for SensorDefaults {
    fn default() -> Self {
        Self {
            digital_noise_sigma_c: 0.05,
            analog_noise_sigma_c: 0.15,
            digital_step_c: 0.0625,
            digital_bias_range_c: (-0.5, 0.5),
            analog_bias_range_c: (-2.0, 0.5),
            adc_bits: 10,
            divider_ref_ohms: 100_000.0,
        }
    }
}

impl SensorDefaults {
    /// No bias and no noise: only quantization remains.
    pub fn ideal() -> Self {
        Self {
            digital_noise_sigma_c: 0.0,
            analog_noise_sigma_c: 0.0,
            digital_bias_range_c: (0.0, 0.0),
            analog_bias_range_c: (0.0, 0.0),
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.digital_noise_sigma_c >= 0.0 && self.analog_noise_sigma_c >= 0.0) {
            out.push("noise sigmas must be >= 0".to_string());
        }
        if !(self.digital_step_c > 0.0) {
            out.push(format!("digital_step_c ({}) must be > 0", self.digital_step_c));
        }
        if !(1..=52).contains(&self.adc_bits) {
            out.push(format!("adc_bits ({}) must be in 1..=52", self.adc_bits));
        }
        if !(self.divider_ref_ohms > 0.0) {
            out.push(format!("divider_ref_ohms ({}) must be > 0", self.divider_ref_ohms));
        }
        for (name, (lo, hi)) in
            [("digital_bias_range_c", self.digital_bias_range_c), ("analog_bias_range_c", self.analog_bias_range_c)]
        {
            if !(lo <= hi) {
                out.push(format!("{name} ({lo}, {hi}) must satisfy lo <= hi"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub construction_seed: u64,
    pub sensors: Vec<SensorSpec>,
}

impl ArraySpec {
    pub fn position_of(&self, id: usize) -> Option<GridPosition> {
        self.sensors.get(id).map(|s| s.position)
    }

    pub fn count(&self, kind: &str) -> usize {
        self.sensors.iter().filter(|s| s.kind.name() == kind).count()
    }
}

/// Lays out the 32 sensors on the 4×8 grid and draws each sensor's fixed bias.
pub fn build_array(seed: u64, defaults: &SensorDefaults) -> ArraySpec {
    let mut rng = seed::rng_for(seed, stream::ARRAY, 0);
    let sensors = (0..ARRAY_SIZE)
        .map(|id| {
            let position = GridPosition::on_grid(id / GRID_COLS + 1, id % GRID_COLS + 1);
            let (kind, (lo, hi), noise_sigma_c) = if id < ANALOG_COUNT {
                (
                    SensorKind::Analog { adc_bits: defaults.adc_bits, divider_ref_ohms: defaults.divider_ref_ohms },
                    defaults.analog_bias_range_c,
                    defaults.analog_noise_sigma_c,
                )
            } else {
                (
                    SensorKind::Digital { step_c: defaults.digital_step_c },
                    defaults.digital_bias_range_c,
                    defaults.digital_noise_sigma_c,
                )
            };
            let bias_c = if lo == hi { lo } else { rng.random_range(lo..=hi) };
            SensorSpec { id, kind, position, bias_c, noise_sigma_c }
        })
        .collect();
    ArraySpec { construction_seed: seed, sensors }
}

/// Round-half-to-even onto a grid anchored at zero.
pub fn quantize(value: f64, step: f64) -> f64 {
    (value / step).round_ties_even() * step
}

fn noisy<R: Rng + ?Sized>(spec: &SensorSpec, true_c: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    true_c + spec.bias_c + spec.noise_sigma_c * z
}

pub fn read_digital<R: Rng + ?Sized>(spec: &SensorSpec, true_c: f64, rng: &mut R) -> Result<f64, SensorError> {
    let SensorKind::Digital { step_c } = spec.kind else {
        return Err(SensorError::WrongKind { id: spec.id, expected: "digital", actual: spec.kind.name() });
    };
    Ok(quantize(noisy(spec, true_c, rng), step_c))
}

/// ADC code for a thermistor at `temp_c` in a divider against `divider_ref_ohms`.
pub fn adc_code(
    temp_c: f64,
    adc_bits: u32,
    divider_ref_ohms: f64,
    coeffs: &ThermistorCoefficients,
) -> Result<u64, ThermistorError> {
    let r = thermistor::temperature_to_resistance(thermistor::celsius_to_kelvin(temp_c), coeffs)?;
    let full_scale = ((1u64 << adc_bits) - 1) as f64;
    let fraction = r / (r + divider_ref_ohms);
    Ok((fraction * full_scale).round_ties_even().clamp(0.0, full_scale) as u64)
}

/// Converts an ADC code back to °C. Codes whose recovered resistance leaves the
/// thermistor's valid range (including 0 and full scale) clamp to the range ends.
pub fn adc_code_to_celsius(
    code: u64,
    adc_bits: u32,
    divider_ref_ohms: f64,
    coeffs: &ThermistorCoefficients,
) -> Result<f64, ThermistorError> {
    let full_scale = ((1u64 << adc_bits) - 1) as f64;
    let fraction = (code as f64).min(full_scale) / full_scale;
    let r = if fraction >= 1.0 {
        coeffs.r_max
    } else {
        (divider_ref_ohms * fraction / (1.0 - fraction)).clamp(coeffs.r_min, coeffs.r_max)
    };
    thermistor::resistance_to_temperature(r, coeffs).map(thermistor::kelvin_to_celsius)
}

pub fn read_analog<R: Rng + ?Sized>(
    spec: &SensorSpec,
    true_c: f64,
    coeffs: &ThermistorCoefficients,
    rng: &mut R,
) -> Result<f64, SensorError> {
    let SensorKind::Analog { adc_bits, divider_ref_ohms } = spec.kind else {
        return Err(SensorError::WrongKind { id: spec.id, expected: "analog", actual: spec.kind.name() });
    };
    let wrap = |source| SensorError::Thermistor { id: spec.id, source };
    let code = adc_code(noisy(spec, true_c, rng), adc_bits, divider_ref_ohms, coeffs).map_err(wrap)?;
    adc_code_to_celsius(code, adc_bits, divider_ref_ohms, coeffs).map_err(wrap)
}

/// Reads all sensors at one instant. The plate perturbation is drawn once and
/// shared by every sensor in the vector.
pub fn read_array<R: Rng + ?Sized>(
    array: &ArraySpec,
    profile: &PlateProfile,
    set_c: f64,
    set_accuracy_c: f64,
    coeffs: &ThermistorCoefficients,
    rng: &mut R,
) -> Result<Vec<f64>, SensorError> {
    let actual_c = plate::perturb_setpoint(set_c, set_accuracy_c, rng);
    array
        .sensors
        .iter()
        .map(|s| {
            let local = plate::local_temperature(&s.position, actual_c, profile);
            match s.kind {
                SensorKind::Digital { .. } => read_digital(s, local, rng),
                SensorKind::Analog { .. } => read_analog(s, local, coeffs, rng),
            }
        })
        .collect()
}
