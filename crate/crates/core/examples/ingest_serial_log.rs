//! Parses a serial acquisition log into reading vectors and keeps a seeded
//! random subset per setpoint. Without an argument a small synthetic log is used.
//!
//! `cargo run --example ingest_serial_log -- capture.log`

use std::fmt::Write as _;
use std::io::Cursor;

use thermocal::dataset::{ingest_serial_log, ingest_serial_log_file, subsample_per_setpoint};

fn synthetic_log() -> String {
    let mut log = String::new();
    let mut t = 1_700_000_000_000u64;
    for set in [36, 37] {
        writeln!(log, "# SET {set}").unwrap();
        for frame in 0..6 {
            // the fourth frame at each setpoint loses sensor 17
            for id in (0..32).filter(|&id| !(frame == 3 && id == 17)) {
                writeln!(log, "{t},S{id:02},{:.4}", set as f64 - 0.5 + id as f64 * 0.01).unwrap();
                t += 12;
            }
            t += 1500 - 32 * 12;
        }
    }
    log
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let outcome = match std::env::args().nth(1) {
        Some(path) => ingest_serial_log_file(path.as_ref())?,
        None => ingest_serial_log(Cursor::new(synthetic_log()), "synthetic")?,
    };
    println!("{} complete frames, {} dropped", outcome.complete_frames, outcome.dropped_frames);
    for set_c in outcome.dataset.setpoints() {
        let n = outcome.dataset.samples().iter().filter(|s| s.label_c == set_c).count();
        println!("  set {set_c:.1} °C: {n} frames");
    }

    let smallest = outcome
        .dataset
        .setpoints()
        .iter()
        .map(|&c| outcome.dataset.samples().iter().filter(|s| s.label_c == c).count())
        .min()
        .unwrap_or(0);
    let kept = subsample_per_setpoint(&outcome.dataset, smallest.min(50), 42)?;
    println!("kept {} vectors ({} per setpoint)", kept.len(), smallest.min(50));
    Ok(())
}
