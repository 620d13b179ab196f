//! Line-oriented acquisition log written by the rig's microcontroller.
//!
//! ```text
//! # SET 37
//! 1700000000000,S00,36.8125
//! 1700000000012,S01,36.75
//! ...
//! ```
//!
//! Readings are grouped into frames of one reading per sensor. A frame closes
//! when a sensor repeats, when a reading falls outside the frame's time window,
//! at a setpoint marker, or at end of input. Incomplete frames are dropped.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{index_setpoints, Dataset, DatasetError, Provenance, Sample};
use crate::sensor::ARRAY_SIZE;

/// Width of the window a complete frame must fit in (one 1.5 s acquisition cycle).
pub const FRAME_WINDOW_MS: u64 = 1500;

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub dataset: Dataset,
    pub complete_frames: usize,
    pub dropped_frames: usize,
}

struct Frame {
    start_ms: u64,
    readings: [Option<f64>; ARRAY_SIZE],
}

struct Assembler {
    label_c: Option<f64>,
    frame: Option<Frame>,
    samples: Vec<Sample>,
    dropped: usize,
}

impl Assembler {
    fn close(&mut self) {
        let Some(frame) = self.frame.take() else { return };
        let (Some(label_c), true) = (self.label_c, frame.readings.iter().all(Option::is_some)) else {
            self.dropped += 1;
            return;
        };
        let readings = frame.readings.iter().map(|r| r.unwrap_or_default()).collect();
        let sample_index = self.samples.len();
        self.samples.push(Sample { readings, label_c, setpoint_index: 0, sample_index });
    }

    fn push(&mut self, t_ms: u64, id: usize, value: f64) {
        let starts_new = match &self.frame {
            Some(f) => t_ms >= f.start_ms + FRAME_WINDOW_MS || f.readings[id].is_some(),
            None => true,
        };
        if starts_new {
            self.close();
            self.frame = Some(Frame { start_ms: t_ms, readings: [None; ARRAY_SIZE] });
        }
        if let Some(f) = self.frame.as_mut() {
            f.readings[id] = Some(value);
        }
    }
}

fn parse_sensor_id(field: &str) -> Option<usize> {
    let digits = field.strip_prefix('S')?;
    if digits.len() != 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&id| id < ARRAY_SIZE)
}

pub fn ingest_serial_log<R: BufRead>(input: R, source: &str) -> Result<IngestOutcome, DatasetError> {
    let mut asm = Assembler { label_c: None, frame: None, samples: Vec::new(), dropped: 0 };
    let mut saw_reading = false;
    for (i, line) in input.lines().enumerate() {
        let line_no = i as u64 + 1;
        let err = |message: String| DatasetError::Ingest { line: line_no, message };
        let line = line.map_err(|e| err(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("SET") {
                let set_c: f64 = value
                    .trim()
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| err(format!("bad setpoint marker {line:?}")))?;
                asm.close();
                asm.label_c = Some(set_c);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [t, id, value] = fields.as_slice() else {
            return Err(err(format!("expected <epoch_ms>,<sensor>,<reading>, got {line:?}")));
        };
        let t_ms: u64 = t.parse().map_err(|_| err(format!("bad timestamp {t:?}")))?;
        let id = parse_sensor_id(id).ok_or_else(|| err(format!("unknown sensor id {id:?}")))?;
        let value: f64 =
            value.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| err(format!("bad reading {value:?}")))?;
        if asm.label_c.is_none() {
            return Err(err("reading before any '# SET' marker".into()));
        }
        saw_reading = true;
        asm.push(t_ms, id, value);
    }
    asm.close();
    if !saw_reading {
        return Err(DatasetError::Ingest { line: 0, message: "log contains no readings".into() });
    }
    if asm.samples.is_empty() {
        return Err(DatasetError::Ingest {
            line: 0,
            message: format!("no complete frames ({} incomplete dropped)", asm.dropped),
        });
    }
    let mut samples = asm.samples;
    index_setpoints(&mut samples);
    let complete_frames = samples.len();
    let dataset = Dataset::new(samples, Provenance::Ingested { source: source.to_string() })?;
    Ok(IngestOutcome { dataset, complete_frames, dropped_frames: asm.dropped })
}

pub fn ingest_serial_log_file(path: &Path) -> Result<IngestOutcome, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    ingest_serial_log(BufReader::new(file), &path.display().to_string())
}
