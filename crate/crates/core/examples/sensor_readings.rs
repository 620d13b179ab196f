//! One reading vector of the simulated array at a chosen setpoint, laid out
//! as the 4×8 grid next to the true local plate temperature.
//!
//! `cargo run --example sensor_readings -- 45`

use thermocal::plate::{local_temperature, PlateProfile, GRID_COLS};
use thermocal::seed::{rng_for, stream};
use thermocal::sensor::{build_array, read_array, SensorDefaults, SensorKind};
use thermocal::thermistor::{fit_coefficients, DEFAULT_CALIBRATION, DEFAULT_RANGE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let set_c: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(45.0);
    let coeffs = fit_coefficients(DEFAULT_CALIBRATION, DEFAULT_RANGE)?;
    let profile = PlateProfile::default();
    let array = build_array(42, &SensorDefaults::default());
    let mut rng = rng_for(42, stream::SAMPLE, 0);
    let readings = read_array(&array, &profile, set_c, 0.0, &coeffs, &mut rng)?;

    println!("setpoint {set_c} °C, attenuation k = {:.3}\n", profile.attenuation(set_c));
    println!("readings (A = analog thermistor, D = digital):");
    for (row, chunk) in array.sensors.chunks(GRID_COLS).enumerate() {
        let line: Vec<String> = chunk
            .iter()
            .map(|s| {
                let tag = match s.kind {
                    SensorKind::Analog { .. } => 'A',
                    SensorKind::Digital { .. } => 'D',
                };
                format!("{tag}{:7.3}", readings[s.id])
            })
            .collect();
        println!("row {} {}", row + 1, line.join(" "));
    }
    println!("\nplate field:");
    for chunk in array.sensors.chunks(GRID_COLS) {
        let line: Vec<String> =
            chunk.iter().map(|s| format!("{:8.3}", local_temperature(&s.position, set_c, &profile))).collect();
        println!("      {}", line.join(" "));
    }
    let mean = readings.iter().sum::<f64>() / readings.len() as f64;
    let min = readings.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("\nmean {mean:.3} °C, coldest {min:.3} °C");
    Ok(())
}
