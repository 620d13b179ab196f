//! Generates the staircase dataset, writes it as CSV and checks that reading
//! it back gives the same samples.
//!
//! `cargo run --example simulate_dataset -- /tmp/dataset.csv`

use std::path::PathBuf;

use thermocal::dataset::{self, read_csv_file, write_csv_file};
use thermocal::plate::{PlateProfile, Protocol};
use thermocal::sensor::{build_array, SensorDefaults};
use thermocal::thermistor::{fit_coefficients, DEFAULT_CALIBRATION, DEFAULT_RANGE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("dataset.csv"));
    let coeffs = fit_coefficients(DEFAULT_CALIBRATION, DEFAULT_RANGE)?;
    let array = build_array(42, &SensorDefaults::default());
    let data = dataset::generate(&array, &PlateProfile::default(), &Protocol::default(), &coeffs, 42)?;

    write_csv_file(&data, &path)?;
    let back = read_csv_file(&path)?;
    assert_eq!(back.samples(), data.samples());
    println!("wrote {} vectors x {} readings to {}", data.len(), data.arity(), path.display());
    println!("content hash {}", data.content_hash());

    let (train, test) = dataset::split(&data, 0.8, 42)?;
    println!("split: {} train / {} test", train.len(), test.len());

    println!("\n set °C  mean reading  mean - set");
    for set_c in data.setpoints() {
        let rows: Vec<_> = data.samples().iter().filter(|s| s.label_c == set_c).collect();
        let mean = rows.iter().flat_map(|s| &s.readings).sum::<f64>() / (rows.len() * data.arity()) as f64;
        println!("{set_c:7.1} {mean:13.3} {:11.3}", mean - set_c);
    }
    Ok(())
}
