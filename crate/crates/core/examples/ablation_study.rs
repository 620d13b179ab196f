//! Runs all ten ablation variants on the seed-42 simulated dataset and prints
//! the comparison table.

use thermocal::ablation::{render_report, run_ablation, AblationSettings, ReportFormat, Variant};
use thermocal::dataset;
use thermocal::plate::{PlateProfile, Protocol};
use thermocal::sensor::{build_array, SensorDefaults};
use thermocal::thermistor::{fit_coefficients, DEFAULT_CALIBRATION, DEFAULT_RANGE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 42;
    let coeffs = fit_coefficients(DEFAULT_CALIBRATION, DEFAULT_RANGE)?;
    let array = build_array(seed, &SensorDefaults::default());
    let data = dataset::generate(&array, &PlateProfile::default(), &Protocol::default(), &coeffs, seed)?;

    let run = run_ablation(&data, &Variant::ALL, &AblationSettings::default())?;
    print!("{}", render_report(&run.report, ReportFormat::TextTable));
    println!("wall time {:.1} s", run.report.metadata.wall_time_s);

    if let Some(long) = run.history("epochs_600") {
        let (best_epoch, best) = long
            .test_mse
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i + 1, *v))
            .unwrap_or_default();
        println!(
            "epochs_600: lowest test mse {best:.3e} at epoch {best_epoch}, final {:.3e}",
            long.test_mse.last().unwrap()
        );
    }
    Ok(())
}
