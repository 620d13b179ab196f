//! Hotplate model: a radially attenuated steady-state surface field and the
//! staircase setpoint protocol.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlateError {
    #[error("invalid plate profile: {0}")]
    Profile(String),
    #[error("invalid protocol: {0}")]
    Protocol(String),
}

/// Surface temperature field parameters.
///
/// The field at distance `ρ` from the centre is
/// `ambient + (set − ambient)·(1 − k(set)·(ρ/radius)²)` with
/// `k(set) = base + slope·(set − 30)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateProfile {
    pub ambient_c: f64,
    pub nonuniformity_base: f64,
    pub nonuniformity_slope: f64,
    pub plate_radius_mm: f64,
}

impl Default for PlateProfile {
    fn default() -> Self {
        Self { ambient_c: 22.0, nonuniformity_base: 0.1, nonuniformity_slope: 0.025, plate_radius_mm: 80.0 }
    }
}

/// Setpoint at which the attenuation equals `nonuniformity_base`.
const ATTENUATION_REFERENCE_C: f64 = 30.0;

impl PlateProfile {
    /// A field with no radial attenuation.
    pub fn flat(ambient_c: f64) -> Self {
        Self { ambient_c, nonuniformity_base: 0.0, nonuniformity_slope: 0.0, plate_radius_mm: 80.0 }
    }

    pub fn attenuation(&self, set_c: f64) -> f64 {
        self.nonuniformity_base + self.nonuniformity_slope * (set_c - ATTENUATION_REFERENCE_C)
    }

    pub fn validate(&self) -> Result<(), PlateError> {
        if !(0.0..1.0).contains(&self.nonuniformity_base) {
            return Err(PlateError::Profile(format!(
                "nonuniformity_base = {} must lie in [0, 1)",
                self.nonuniformity_base
            )));
        }
        if !(self.nonuniformity_slope >= 0.0) {
            return Err(PlateError::Profile(format!(
                "nonuniformity_slope = {} must be >= 0",
                self.nonuniformity_slope
            )));
        }
        if !(self.plate_radius_mm > 0.0) {
            return Err(PlateError::Profile(format!("plate_radius_mm = {} must be > 0", self.plate_radius_mm)));
        }
        if !self.ambient_c.is_finite() {
            return Err(PlateError::Profile("ambient_c must be finite".into()));
        }
        Ok(())
    }

    /// Checks that the attenuation stays in `[0, 1)` for every setpoint of `protocol`.
    pub fn validate_for(&self, protocol: &Protocol) -> Result<(), PlateError> {
        self.validate()?;
        for set_c in staircase_setpoints(protocol) {
            let k = self.attenuation(set_c);
            if !(0.0..1.0).contains(&k) {
                return Err(PlateError::Profile(format!("attenuation k({set_c}) = {k} leaves [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Sensor location on the 4×8 grid: 1-based indices plus millimetres from the plate centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPosition {
    pub row: usize,
    pub col: usize,
    pub x_mm: f64,
    pub y_mm: f64,
}

pub const GRID_ROWS: usize = 4;
pub const GRID_COLS: usize = 8;
pub const GRID_PITCH_MM: f64 = 20.0;

impl GridPosition {
    /// Grid cell centred on the plate at [`GRID_PITCH_MM`] spacing. Row 1 is the top edge.
    pub fn on_grid(row: usize, col: usize) -> Self {
        let x_mm = (col as f64 - (GRID_COLS as f64 + 1.0) / 2.0) * GRID_PITCH_MM;
        let y_mm = ((GRID_ROWS as f64 + 1.0) / 2.0 - row as f64) * GRID_PITCH_MM;
        Self { row, col, x_mm, y_mm }
    }

    pub fn radius_mm(&self) -> f64 {
        self.x_mm.hypot(self.y_mm)
    }
}

/// Steady-state surface temperature under a sensor.
pub fn local_temperature(pos: &GridPosition, set_c: f64, profile: &PlateProfile) -> f64 {
    let rel = pos.radius_mm() / profile.plate_radius_mm;
    let k = profile.attenuation(set_c);
    profile.ambient_c + (set_c - profile.ambient_c) * (1.0 - k * rel * rel)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Protocol {
    pub start_c: f64,
    pub end_c: f64,
    pub step_c: f64,
    pub samples_per_setpoint: usize,
    /// Half-width of the uniform error between the commanded and the actual plate temperature.
    pub set_accuracy_c: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self { start_c: 30.0, end_c: 45.0, step_c: 1.0, samples_per_setpoint: 50, set_accuracy_c: 0.15 }
    }
}

impl Protocol {
    /// Returns every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.start_c <= self.end_c) {
            out.push(format!("start_c ({}) must be <= end_c ({})", self.start_c, self.end_c));
        }
        if !(self.step_c > 0.0) {
            out.push(format!("step_c ({}) must be > 0", self.step_c));
        }
        if self.samples_per_setpoint < 1 {
            out.push("samples_per_setpoint must be >= 1".into());
        }
        if !(self.set_accuracy_c >= 0.0) {
            out.push(format!("set_accuracy_c ({}) must be >= 0", self.set_accuracy_c));
        }
        out
    }

    pub fn validate(&self) -> Result<(), PlateError> {
        match self.violations().as_slice() {
            [] => Ok(()),
            v => Err(PlateError::Protocol(v.join("; "))),
        }
    }
}

/// `[start, start + step, …, end]`, inclusive of `end` up to float slack.
pub fn staircase_setpoints(protocol: &Protocol) -> Vec<f64> {
    if protocol.validate().is_err() {
        return Vec::new();
    }
    let n = ((protocol.end_c - protocol.start_c) / protocol.step_c + 1e-9).floor() as usize;
    (0..=n).map(|i| protocol.start_c + i as f64 * protocol.step_c).collect()
}

/// Actual plate temperature for a commanded setpoint, uniform within `±accuracy_c`.
pub fn perturb_setpoint<R: Rng + ?Sized>(set_c: f64, accuracy_c: f64, rng: &mut R) -> f64 {
    if accuracy_c == 0.0 {
        return set_c;
    }
    set_c + rng.random_range(-accuracy_c..=accuracy_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    fn all_cells() -> Vec<GridPosition> {
        (1..=GRID_ROWS).flat_map(|r| (1..=GRID_COLS).map(move |c| GridPosition::on_grid(r, c))).collect()
    }

    fn at_radius(r: f64) -> GridPosition {
        GridPosition { row: 1, col: 1, x_mm: r, y_mm: 0.0 }
    }

    #[test]
    fn center_is_exact() {
        let p = PlateProfile::default();
        assert_eq!(local_temperature(&at_radius(0.0), 45.0, &p), 45.0);
    }

    #[test]
    fn edge_values() {
        let p = PlateProfile::default();
        let edge = at_radius(p.plate_radius_mm);
        assert!((local_temperature(&edge, 45.0, &p) - 34.075).abs() < 1e-12);
        assert!((local_temperature(&edge, 30.0, &p) - 29.2).abs() < 1e-12);
    }

    #[test]
    fn decreasing_in_radius_and_gap_grows() {
        let p = PlateProfile::default();
        let mut prev = f64::INFINITY;
        for i in 0..=90 {
            let t = local_temperature(&at_radius(i as f64), 40.0, &p);
            assert!(t < prev);
            prev = t;
        }
        let pos = at_radius(50.0);
        let gaps: Vec<f64> = (30..=45).map(|s| s as f64 - local_temperature(&pos, s as f64, &p)).collect();
        assert!(gaps.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_layout_is_centered() {
        let cells = all_cells();
        assert_eq!(cells.len(), 32);
        let (sx, sy) = cells.iter().fold((0.0, 0.0), |(a, b), c| (a + c.x_mm, b + c.y_mm));
        assert_eq!((sx, sy), (0.0, 0.0));
        let far = cells.iter().map(|c| c.radius_mm()).fold(0.0, f64::max);
        assert!(far <= PlateProfile::default().plate_radius_mm);
    }

    #[test]
    fn spread_and_mean_deficit_grow_with_setpoint() {
        let p = PlateProfile::default();
        let cells = all_cells();
        let mut prev_spread = 0.0;
        let mut prev_deficit = 0.0;
        for s in 30..=45 {
            let s = s as f64;
            let vals: Vec<f64> = cells.iter().map(|c| local_temperature(c, s, &p)).collect();
            let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
            let deficit = s - vals.iter().sum::<f64>() / vals.len() as f64;
            assert!(deficit >= 0.0);
            assert!(spread >= prev_spread && deficit >= prev_deficit);
            prev_spread = spread;
            prev_deficit = deficit;
        }
    }

    #[test]
    fn staircase() {
        let mk = |s, e, st| Protocol { start_c: s, end_c: e, step_c: st, ..Protocol::default() };
        let full = staircase_setpoints(&mk(30.0, 45.0, 1.0));
        assert_eq!(full.len(), 16);
        assert_eq!(full[0], 30.0);
        assert_eq!(full[15], 45.0);
        assert_eq!(staircase_setpoints(&mk(30.0, 30.0, 1.0)), vec![30.0]);
        assert_eq!(staircase_setpoints(&mk(30.0, 45.0, 5.0)), vec![30.0, 35.0, 40.0, 45.0]);
        assert!(mk(45.0, 30.0, 1.0).validate().is_err());
        assert_eq!(mk(45.0, 30.0, 0.0).violations().len(), 2);
    }

    #[test]
    fn perturbation_bounds_and_determinism() {
        let mut rng = rng_for(1, 0, 0);
        assert_eq!(perturb_setpoint(37.0, 0.0, &mut rng), 37.0);
        for _ in 0..1000 {
            let v = perturb_setpoint(37.0, 0.15, &mut rng);
            assert!((37.0 - 0.15..=37.0 + 0.15).contains(&v));
        }
        let a = perturb_setpoint(37.0, 0.15, &mut rng_for(7, 0, 0));
        let b = perturb_setpoint(37.0, 0.15, &mut rng_for(7, 0, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn profile_validation() {
        let p = PlateProfile::default();
        assert!(p.validate_for(&Protocol::default()).is_ok());
        let steep = PlateProfile { nonuniformity_slope: 0.1, ..p };
        assert!(steep.validate_for(&Protocol::default()).is_err());
        let bad = PlateProfile { nonuniformity_base: 1.0, ..p };
        assert!(bad.validate().is_err());
    }
}
