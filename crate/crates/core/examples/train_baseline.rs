//! Simulates the default 800-vector staircase run, trains the 32→20→1 network
//! and prints held-out accuracy next to the raw-sensor baselines.

use thermocal::dataset::{self, shuffle_components};
use thermocal::nn::{self, MlpArchitecture, TrainConfig};
use thermocal::plate::{PlateProfile, Protocol};
use thermocal::sensor::{build_array, SensorDefaults};
use thermocal::thermistor::{fit_coefficients, DEFAULT_CALIBRATION, DEFAULT_RANGE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 42;
    let coeffs = fit_coefficients(DEFAULT_CALIBRATION, DEFAULT_RANGE)?;
    let array = build_array(seed, &SensorDefaults::default());
    let data = dataset::generate(&array, &PlateProfile::default(), &Protocol::default(), &coeffs, seed)?;
    let (train, test) = dataset::split(&data, 0.8, seed)?;

    let started = std::time::Instant::now();
    let (model, history) = nn::train(&train, &test, &MlpArchitecture::baseline(), &TrainConfig::default())?;
    let metrics = nn::evaluate(&model, &test)?;
    println!("trained {} epochs in {:.2?}", history.epochs(), started.elapsed());
    println!(
        "final train mse {:.3e}, test mse {:.3e}",
        history.train_mse.last().unwrap(),
        history.test_mse.last().unwrap()
    );
    println!("test MAE {:.3} °C, RMSE {:.3} °C, max {:.3} °C", metrics.mae_c, metrics.rmse_c, metrics.max_abs_err_c);

    let mean_mae = test
        .samples()
        .iter()
        .map(|s| (s.readings.iter().sum::<f64>() / s.readings.len() as f64 - s.label_c).abs())
        .sum::<f64>()
        / test.len() as f64;
    println!("array-mean MAE {:.3} °C", mean_mae);

    let shuffled = shuffle_components(&test, seed);
    let shuffled_metrics = nn::evaluate(&model, &shuffled)?;
    println!(
        "shuffled test mse {:.3e} ({:.1}x baseline)",
        shuffled_metrics.mse_normalized,
        shuffled_metrics.mse_normalized / metrics.mse_normalized
    );
    println!("\n set °C   mean reading   mean prediction");
    for s in &metrics.per_setpoint {
        println!("{:6.1} {:14.3} {:17.3}", s.set_c, s.mean_reading_c, s.mean_prediction_c);
    }
    Ok(())
}
