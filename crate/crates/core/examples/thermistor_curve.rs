//! Fits Steinhart–Hart constants to three datasheet points and prints the
//! resistance/temperature curve together with the inverse roundtrip error.

use thermocal::thermistor::{
    celsius_to_kelvin, fit_coefficients, kelvin_to_celsius, resistance_to_temperature, temperature_to_resistance,
    DEFAULT_CALIBRATION, DEFAULT_RANGE,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coeffs = fit_coefficients(DEFAULT_CALIBRATION, DEFAULT_RANGE)?;
    println!("A = {:.6e}  B = {:.6e}  C = {:.6e}", coeffs.a, coeffs.b, coeffs.c);
    println!("valid for {:.0} Ω ..= {:.0} Ω\n", coeffs.r_min, coeffs.r_max);

    println!("  T °C        R Ω     roundtrip K");
    for t_c in (-10..=125).step_by(15) {
        let t_k = celsius_to_kelvin(t_c as f64);
        let r = temperature_to_resistance(t_k, &coeffs)?;
        let back = resistance_to_temperature(r, &coeffs)?;
        println!("{:6} {:12.1} {:13.2e}", t_c, r, (back - t_k).abs());
    }

    for (ohms, kelvin) in DEFAULT_CALIBRATION {
        let t = resistance_to_temperature(ohms, &coeffs)?;
        println!(
            "calibration {ohms:>9.0} Ω -> {:.6} °C (datasheet {:.2})",
            kelvin_to_celsius(t),
            kelvin_to_celsius(kelvin)
        );
    }

    match resistance_to_temperature(500.0, &coeffs) {
        Ok(t) => println!("500 Ω -> {t} K"),
        Err(e) => println!("500 Ω rejected: {e}"),
    }
    Ok(())
}
