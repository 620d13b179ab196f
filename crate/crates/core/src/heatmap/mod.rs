//! Per-setpoint reading grids and the SVG/JSON figures built from them.

mod charts;
mod svg;

pub use charts::{emit_loss_curves_svg, emit_prediction_scatter_svg, scatter_series, ScatterPoint, LOG_FLOOR};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::sensor::ArraySpec;
use svg::Svg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("nothing to plot: {0}")]
    Empty(String),
    #[error("{predictions} predictions for {samples} samples")]
    Misaligned { predictions: usize, samples: usize },
    #[error("malformed grid: {0}")]
    Shape(String),
}

/// Mean reading of every sensor at one setpoint, laid out as the physical grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingGrid {
    #[serde(rename = "setpoint")]
    pub setpoint_c: f64,
    pub rows: usize,
    pub cols: usize,
    /// `values[row][col]`, zero-based.
    pub values: Vec<Vec<f64>>,
    pub sample_count: usize,
}

impl ReadingGrid {
    fn check(&self) -> Result<(), ChartError> {
        let ok = self.rows >= 1
            && self.cols >= 1
            && self.values.len() == self.rows
            && self.values.iter().all(|r| r.len() == self.cols);
        if ok {
            Ok(())
        } else {
            Err(ChartError::Shape(format!("setpoint {} is not {}x{}", self.setpoint_c, self.rows, self.cols)))
        }
    }

    fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

/// One grid per setpoint (ascending), each cell averaging that sensor's readings.
pub fn mean_grids(ds: &Dataset, array: &ArraySpec) -> Result<Vec<ReadingGrid>, ChartError> {
    if ds.arity() != array.sensors.len() {
        return Err(ChartError::Shape(format!(
            "dataset has {} readings per vector, array has {} sensors",
            ds.arity(),
            array.sensors.len()
        )));
    }
    let rows = array.sensors.iter().map(|s| s.position.row).max().unwrap_or(0);
    let cols = array.sensors.iter().map(|s| s.position.col).max().unwrap_or(0);
    let mut groups: BTreeMap<usize, (f64, usize, Vec<f64>)> = BTreeMap::new();
    for s in ds.samples() {
        let g = groups.entry(s.setpoint_index).or_insert_with(|| (s.label_c, 0, vec![0.0; s.readings.len()]));
        g.1 += 1;
        for (acc, r) in g.2.iter_mut().zip(&s.readings) {
            *acc += r;
        }
    }
    Ok(groups
        .into_values()
        .map(|(setpoint_c, count, sums)| {
            let mut values = vec![vec![0.0; cols]; rows];
            for (sensor, sum) in array.sensors.iter().zip(sums) {
                values[sensor.position.row - 1][sensor.position.col - 1] = sum / count as f64;
            }
            ReadingGrid { setpoint_c, rows, cols, values, sample_count: count }
        })
        .collect())
}

/// Companion JSON: `[{setpoint, rows, cols, values, sample_count}, …]`.
pub fn grids_to_json(grids: &[ReadingGrid]) -> String {
    serde_json::to_string_pretty(grids).expect("grids serialize") + "\n"
}

/// Linear ramp between two RGB colours over `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorScale {
    pub cold: [u8; 3],
    pub hot: [u8; 3],
}

impl Default for ColorScale {
    /// Blue (#2c7bb6) for the coldest cell to red (#d7191c) for the hottest.
    fn default() -> Self {
        Self { cold: [0x2c, 0x7b, 0xb6], hot: [0xd7, 0x19, 0x1c] }
    }
}

impl ColorScale {
    pub fn color(&self, v: f64, min: f64, max: f64) -> String {
        let t = if max > min { ((v - min) / (max - min)).clamp(0.0, 1.0) } else { 0.5 };
        let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        format!(
            "#{:02x}{:02x}{:02x}",
            mix(self.cold[0], self.hot[0]),
            mix(self.cold[1], self.hot[1]),
            mix(self.cold[2], self.hot[2])
        )
    }

    fn hex(rgb: [u8; 3]) -> String {
        format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
    }
}

const CELL_PX: f64 = 22.0;
const PANEL_GAP: f64 = 18.0;
const PANELS_PER_ROW: usize = 4;

/// One panel per setpoint with a shared colour range across all panels.
pub fn emit_heatmap_svg(grids: &[ReadingGrid], scale: &ColorScale) -> Result<String, ChartError> {
    if grids.is_empty() {
        return Err(ChartError::Empty("no grids".into()));
    }
    grids.iter().try_for_each(ReadingGrid::check)?;
    let min = grids.iter().flat_map(ReadingGrid::cells).fold(f64::INFINITY, f64::min);
    let max = grids.iter().flat_map(ReadingGrid::cells).fold(f64::NEG_INFINITY, f64::max);
    let rows = grids.iter().map(|g| g.rows).max().unwrap_or(1);
    let cols = grids.iter().map(|g| g.cols).max().unwrap_or(1);

    let panel_w = cols as f64 * CELL_PX;
    let panel_h = rows as f64 * CELL_PX + 16.0;
    let per_row = PANELS_PER_ROW.min(grids.len());
    let panel_rows = grids.len().div_ceil(per_row);
    let margin = 20.0;
    let legend_h = 60.0;
    let width = (margin * 2.0 + per_row as f64 * (panel_w + PANEL_GAP) - PANEL_GAP).max(320.0);
    let height = margin + 24.0 + panel_rows as f64 * (panel_h + PANEL_GAP) + legend_h;

    let mut svg = Svg::new(width, height);
    svg.text(margin, margin + 4.0, "start", 14.0, "Mean sensor readings per setpoint (°C)");
    for (k, g) in grids.iter().enumerate() {
        let ox = margin + (k % per_row) as f64 * (panel_w + PANEL_GAP);
        let oy = margin + 24.0 + (k / per_row) as f64 * (panel_h + PANEL_GAP);
        svg.text(ox, oy + 10.0, "start", 11.0, &format!("set {:.1} °C (n={})", g.setpoint_c, g.sample_count));
        for (r, row) in g.values.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let title = format!("row {} col {}: {:.3} °C", r + 1, c + 1, v);
                svg.rect(
                    "cell",
                    ox + c as f64 * CELL_PX,
                    oy + 16.0 + r as f64 * CELL_PX,
                    CELL_PX - 1.0,
                    CELL_PX - 1.0,
                    &scale.color(v, min, max),
                    Some(&title),
                );
            }
        }
    }

    let ly = height - legend_h + 10.0;
    let lw = (width - 2.0 * margin).min(300.0);
    svg.def(&format!(
        r#"<linearGradient id="ramp" x1="0" x2="1" y1="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient>"#,
        ColorScale::hex(scale.cold),
        ColorScale::hex(scale.hot)
    ));
    svg.rect("legend", margin, ly, lw, 14.0, "url(#ramp)", None);
    svg.text(margin, ly + 30.0, "start", 11.0, &format!("{min:.2} °C"));
    svg.text(margin + lw, ly + 30.0, "end", 11.0, &format!("{max:.2} °C"));
    Ok(svg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Provenance, Sample};
    use crate::sensor::{build_array, SensorDefaults};

    fn dataset(per: usize) -> Dataset {
        let samples = (0..3 * per)
            .map(|i| Sample {
                readings: (0..32).map(|j| 30.0 + (i / per) as f64 + j as f64 * 0.1 + (i % per) as f64 * 0.01).collect(),
                label_c: 30.0 + (i / per) as f64,
                setpoint_index: i / per,
                sample_index: i,
            })
            .collect();
        Dataset::new(samples, Provenance::Ingested { source: "t".into() }).unwrap()
    }

    #[test]
    fn single_sample_grid_is_the_sample_rearranged() {
        let ds = dataset(1);
        let array = build_array(0, &SensorDefaults::default());
        let grids = mean_grids(&ds, &array).unwrap();
        assert_eq!(grids.len(), 3);
        let g = &grids[1];
        assert_eq!((g.rows, g.cols, g.sample_count), (4, 8, 1));
        for (id, r) in ds.samples()[1].readings.iter().enumerate() {
            assert_eq!(g.values[id / 8][id % 8], *r);
        }
    }

    #[test]
    fn cells_stay_within_contributing_range() {
        let ds = dataset(5);
        let grids = mean_grids(&ds, &build_array(0, &SensorDefaults::default())).unwrap();
        for g in &grids {
            for (id, v) in g.values.iter().flatten().enumerate() {
                let vals: Vec<f64> =
                    ds.samples().iter().filter(|s| s.label_c == g.setpoint_c).map(|s| s.readings[id]).collect();
                let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
                let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
                assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn single_cell_fixture() {
        let g = ReadingGrid { setpoint_c: 37.0, rows: 1, cols: 1, values: vec![vec![36.5]], sample_count: 1 };
        let svg = emit_heatmap_svg(&[g], &ColorScale::default()).unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 1);
    }

    #[test]
    fn deterministic_and_rejects_empty() {
        let grids = mean_grids(&dataset(2), &build_array(0, &SensorDefaults::default())).unwrap();
        let a = emit_heatmap_svg(&grids, &ColorScale::default()).unwrap();
        assert_eq!(a, emit_heatmap_svg(&grids, &ColorScale::default()).unwrap());
        assert_eq!(a.matches(r#"class="cell""#).count(), 3 * 32);
        assert!(emit_heatmap_svg(&[], &ColorScale::default()).is_err());
    }

    #[test]
    fn color_ramp_endpoints() {
        let s = ColorScale::default();
        assert_eq!(s.color(0.0, 0.0, 1.0), "#2c7bb6");
        assert_eq!(s.color(1.0, 0.0, 1.0), "#d7191c");
        assert_eq!(s.color(5.0, 0.0, 1.0), "#d7191c");
    }

    #[test]
    fn json_companion() {
        let grids = mean_grids(&dataset(1), &build_array(0, &SensorDefaults::default())).unwrap();
        let v: serde_json::Value = serde_json::from_str(&grids_to_json(&grids)).unwrap();
        assert_eq!(v[0]["rows"], 4);
        assert_eq!(v[0]["cols"], 8);
        assert_eq!(v[2]["setpoint"], 32.0);
        assert_eq!(v[0]["values"].as_array().unwrap().len(), 4);
    }
}
