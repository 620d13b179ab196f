//! Writes the per-setpoint heatmap (SVG + JSON) for the simulated dataset.
//!
//! `cargo run --example heatmap_figures -- /tmp/figures`

use std::path::PathBuf;

use thermocal::dataset;
use thermocal::heatmap::{emit_heatmap_svg, grids_to_json, mean_grids, ColorScale};
use thermocal::plate::{PlateProfile, Protocol};
use thermocal::sensor::{build_array, SensorDefaults};
use thermocal::thermistor::{fit_coefficients, DEFAULT_CALIBRATION, DEFAULT_RANGE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir =
        std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("thermocal-figures"));
    std::fs::create_dir_all(&dir)?;
    let coeffs = fit_coefficients(DEFAULT_CALIBRATION, DEFAULT_RANGE)?;
    let array = build_array(42, &SensorDefaults::default());
    let data = dataset::generate(&array, &PlateProfile::default(), &Protocol::default(), &coeffs, 42)?;

    let grids = mean_grids(&data, &array)?;
    std::fs::write(dir.join("heatmap.svg"), emit_heatmap_svg(&grids, &ColorScale::default())?)?;
    std::fs::write(dir.join("heatmap.json"), grids_to_json(&grids))?;

    let last = grids.last().expect("at least one setpoint");
    let coldest = last.values.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let warmest = last.values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("{} panels written to {}", grids.len(), dir.display());
    println!("at {:.0} °C the mean readings span {coldest:.2} .. {warmest:.2} °C", last.setpoint_c);
    Ok(())
}
