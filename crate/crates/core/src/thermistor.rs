//! NTC thermistor physics based on the Steinhart–Hart relation
//! `1/T = A + B·ln R + C·(ln R)³`.
//!
//! Temperatures are kelvin throughout this module. Every conversion checks the
//! resistance validity range carried by [`ThermistorCoefficients`], since the
//! cubic term extrapolates badly outside the calibrated span.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Offset between the Celsius and kelvin scales.
pub const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermistorError {
    #[error("resistance {value} Ω is below the valid minimum r_min = {bound} Ω")]
    BelowRange { value: f64, bound: f64 },
    #[error("resistance {value} Ω is above the valid maximum r_max = {bound} Ω")]
    AboveRange { value: f64, bound: f64 },
    #[error("Steinhart-Hart domain error: {0}")]
    Domain(String),
    #[error("coefficient fit failed: {0}")]
    Fit(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
}

/// Steinhart–Hart constants together with the resistance span they are valid for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermistorCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl ThermistorCoefficients {
    /// Builds a coefficient set, checking that `1/T` stays positive over the whole range.
    pub fn new(a: f64, b: f64, c: f64, r_min: f64, r_max: f64) -> Result<Self, ThermistorError> {
        let coeffs = Self { a, b, c, r_min, r_max };
        coeffs.validate()?;
        Ok(coeffs)
    }

    pub fn validate(&self) -> Result<(), ThermistorError> {
        let all_finite = [self.a, self.b, self.c, self.r_min, self.r_max].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(ThermistorError::InvalidCoefficients("non-finite value".into()));
        }
        if self.a <= 0.0 {
            return Err(ThermistorError::InvalidCoefficients(format!("a = {} must be > 0", self.a)));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err(ThermistorError::InvalidCoefficients(format!(
                "need 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        // The cubic in x = ln R has at most two interior extrema, at x = ±sqrt(-b / 3c).
        let (lo, hi) = (self.r_min.ln(), self.r_max.ln());
        let mut probes = vec![lo, hi];
        if self.c != 0.0 && -self.b / (3.0 * self.c) > 0.0 {
            let s = (-self.b / (3.0 * self.c)).sqrt();
            probes.extend([s, -s].into_iter().filter(|x| *x > lo && *x < hi));
        }
        if let Some(x) = probes.into_iter().find(|&x| self.inverse_temperature(x) <= 0.0) {
            return Err(ThermistorError::InvalidCoefficients(format!("1/T is non-positive at R = {} Ω", x.exp())));
        }
        Ok(())
    }

    /// `A + B·x + C·x³` for `x = ln R`.
    fn inverse_temperature(&self, ln_r: f64) -> f64 {
        self.a + self.b * ln_r + self.c * ln_r.powi(3)
    }

    fn check_range(&self, r: f64) -> Result<(), ThermistorError> {
        if r.is_nan() || r < self.r_min {
            return Err(ThermistorError::BelowRange { value: r, bound: self.r_min });
        }
        if r > self.r_max {
            return Err(ThermistorError::AboveRange { value: r, bound: self.r_max });
        }
        Ok(())
    }
}

/// Converts a thermistor resistance (Ω) to absolute temperature (K).
pub fn resistance_to_temperature(r: f64, coeffs: &ThermistorCoefficients) -> Result<f64, ThermistorError> {
    coeffs.check_range(r)?;
    let denom = coeffs.inverse_temperature(r.ln());
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(ThermistorError::Domain(format!("A + B ln R + C (ln R)^3 = {denom} at R = {r} Ω")));
    }
    Ok(1.0 / denom)
}

/// Inverse of [`resistance_to_temperature`]: solves the depressed cubic
/// `C·x³ + B·x + (A − 1/T) = 0` for `x = ln R`.
///
/// The closed-form root seeds a Newton iteration that is kept inside a bisection
/// bracket over `[ln r_min, ln r_max]`.
pub fn temperature_to_resistance(t: f64, coeffs: &ThermistorCoefficients) -> Result<f64, ThermistorError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(ThermistorError::Domain(format!("temperature {t} K must be positive and finite")));
    }
    let target = 1.0 / t;
    let f = |x: f64| coeffs.inverse_temperature(x) - target;
    let df = |x: f64| coeffs.b + 3.0 * coeffs.c * x * x;

    let (mut lo, mut hi) = (coeffs.r_min.ln(), coeffs.r_max.ln());
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(coeffs.r_min);
    }
    if f_hi == 0.0 {
        return Ok(coeffs.r_max);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(ThermistorError::Domain(format!(
            "no resistance in [{}, {}] Ω maps to {t} K",
            coeffs.r_min, coeffs.r_max
        )));
    }
    // Keep f(lo) < 0 < f(hi) so the bracket update is orientation-free.
    if f_lo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }

    let mut x = closed_form_root(coeffs, target)
        .filter(|x| x.is_finite() && *x > lo.min(hi) && *x < lo.max(hi))
        .unwrap_or(0.5 * (lo + hi));

    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        let inside = newton > lo.min(hi) && newton < lo.max(hi);
        let next = if slope != 0.0 && newton.is_finite() && inside { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    let r = x.exp();
    Ok(r.clamp(coeffs.r_min, coeffs.r_max))
}

/// Cardano root of `c·x³ + b·x + (a − target) = 0` when it has a single real root.
fn closed_form_root(coeffs: &ThermistorCoefficients, target: f64) -> Option<f64> {
    let ThermistorCoefficients { a, b, c, .. } = *coeffs;
    if c == 0.0 {
        return (b != 0.0).then(|| (target - a) / b);
    }
    let y = (a - target) / (2.0 * c);
    let p = b / (3.0 * c);
    let disc = p.powi(3) + y * y;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((s - y).cbrt() - (s + y).cbrt())
}

/// Fits `A, B, C` through three `(ohms, kelvin)` calibration points.
pub fn fit_coefficients(
    points: [(f64, f64); 3],
    r_range: (f64, f64),
) -> Result<ThermistorCoefficients, ThermistorError> {
    for &(r, t) in &points {
        if !(r > 0.0) || !(t > 0.0) {
            return Err(ThermistorError::Fit(format!("point ({r} Ω, {t} K) must have positive values")));
        }
    }
    let xs = points.map(|(r, _)| r.ln());
    for i in 0..3 {
        for j in (i + 1)..3 {
            if xs[i] == xs[j] {
                return Err(ThermistorError::Fit(format!(
                    "duplicate resistance {} Ω makes the system singular",
                    points[i].0
                )));
            }
        }
    }
    let m = Matrix3::from_fn(|i, j| xs[i].powi([0, 1, 3][j]));
    let rhs = Vector3::from_fn(|i, _| 1.0 / points[i].1);
    let sol = m.lu().solve(&rhs).ok_or_else(|| ThermistorError::Fit("singular calibration system".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(ThermistorError::Fit("ill-conditioned calibration system".into()));
    }
    ThermistorCoefficients::new(sol[0], sol[1], sol[2], r_range.0, r_range.1)
}

/// Calibration points for a 100 kΩ (at 25 °C) NTC: 0 °C, 25 °C and 85 °C.
pub const DEFAULT_CALIBRATION: [(f64, f64); 3] = [(331_000.0, 273.15), (100_000.0, 298.15), (10_570.0, 358.15)];

/// Resistance span covered by [`DEFAULT_CALIBRATION`] fits (roughly −30 °C to 160 °C).
pub const DEFAULT_RANGE: (f64, f64) = (1_000.0, 2_000_000.0);

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - KELVIN_OFFSET
}
