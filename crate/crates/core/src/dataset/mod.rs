//! Labelled reading vectors: generation from the simulated rig, splitting,
//! the component-shuffle transform, subsampling, and file formats.

mod csv_io;
mod serial;

pub use csv_io::{read_csv, read_csv_file, write_csv, write_csv_file, CSV_DECIMALS};
pub use serial::{ingest_serial_log, ingest_serial_log_file, IngestOutcome, FRAME_WINDOW_MS};

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::plate::{self, PlateError, PlateProfile, Protocol};
use crate::seed::{self, stream};
use crate::sensor::{self, ArraySpec, SensorError, ARRAY_SIZE};
use crate::thermistor::ThermistorCoefficients;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset is empty")]
    Empty,
    #[error("sample {sample_index} has {found} readings, expected {expected}")]
    Arity { sample_index: usize, expected: usize, found: usize },
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Plate(#[from] PlateError),
    #[error("split error: {0}")]
    Split(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("ingest error at line {line}: {message}")]
    Ingest { line: u64, message: String },
    #[error("setpoint {setpoint_c} °C has {available} samples, {requested} requested")]
    Insufficient { setpoint_c: f64, available: usize, requested: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One simultaneous frame of readings, labelled with the nominal setpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub readings: Vec<f64>,
    pub label_c: f64,
    pub setpoint_index: usize,
    pub sample_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Simulated { seed: u64, config_hash: String },
    Ingested { source: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    pub provenance: Provenance,
    pub schema_version: u32,
}

impl Dataset {
    /// Every sample must have the same, non-zero number of readings.
    pub fn new(samples: Vec<Sample>, provenance: Provenance) -> Result<Self, DatasetError> {
        let first = samples.first().ok_or(DatasetError::Empty)?;
        let expected = first.readings.len();
        if let Some(bad) = samples.iter().find(|s| s.readings.len() != expected || expected == 0) {
            return Err(DatasetError::Arity { sample_index: bad.sample_index, expected, found: bad.readings.len() });
        }
        Ok(Self { samples, provenance, schema_version: SCHEMA_VERSION })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.samples[0].readings.len()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.label_c).collect()
    }

    /// Distinct labels in ascending order.
    pub fn setpoints(&self) -> Vec<f64> {
        let mut v = self.labels();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Keeps only the reading columns in `columns`, e.g. one sensor family.
    pub fn select_columns(&self, columns: std::ops::Range<usize>) -> Result<Self, DatasetError> {
        if columns.is_empty() || columns.end > self.arity() {
            return Err(DatasetError::Arity { sample_index: 0, expected: self.arity(), found: columns.end });
        }
        let samples = self
            .samples
            .iter()
            .map(|s| Sample { readings: s.readings[columns.clone()].to_vec(), ..s.clone() })
            .collect();
        Self::new(samples, self.provenance.clone())
    }

    /// SHA-256 of the dataset's CSV encoding.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        match write_csv(self, &mut buf) {
            Ok(()) => hex_digest(&buf),
            // Non-32 arity: hash the raw values instead.
            Err(_) => {
                let mut h = Sha256::new();
                for s in &self.samples {
                    h.update(s.label_c.to_le_bytes());
                    for r in &s.readings {
                        h.update(r.to_le_bytes());
                    }
                }
                format!("{:x}", h.finalize())
            }
        }
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Assigns `setpoint_index` as the rank of each label among the distinct labels.
pub(crate) fn index_setpoints(samples: &mut [Sample]) {
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.label_c).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    for s in samples {
        s.setpoint_index = distinct.partition_point(|&d| d < s.label_c);
    }
}

/// Rounds a reading to the fixed decimal precision stored on disk.
pub fn round_reading(v: f64) -> f64 {
    let scale = 10f64.powi(CSV_DECIMALS as i32);
    (v * scale).round_ties_even() / scale
}

/// Simulates the staircase run: `samples_per_setpoint` vectors at every setpoint.
///
/// Each sample owns a random stream keyed by its global index, so the output
/// does not depend on generation order.
pub fn generate(
    array: &ArraySpec,
    profile: &PlateProfile,
    protocol: &Protocol,
    coeffs: &ThermistorCoefficients,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    protocol.validate()?;
    profile.validate_for(protocol)?;
    let setpoints = plate::staircase_setpoints(protocol);
    let per = protocol.samples_per_setpoint;
    let mut samples = Vec::with_capacity(setpoints.len() * per);
    for (setpoint_index, &set_c) in setpoints.iter().enumerate() {
        for k in 0..per {
            let sample_index = setpoint_index * per + k;
            let mut rng = seed::rng_for(seed, stream::SAMPLE, sample_index as u64);
            let readings = sensor::read_array(array, profile, set_c, protocol.set_accuracy_c, coeffs, &mut rng)?
                .into_iter()
                .map(round_reading)
                .collect();
            samples.push(Sample { readings, label_c: set_c, setpoint_index, sample_index });
        }
    }
    let config_hash = {
        let doc = serde_json::json!({
            "array": array,
            "profile": profile,
            "protocol": protocol,
            "coeffs": coeffs,
        });
        hex_digest(doc.to_string().as_bytes())
    };
    Dataset::new(samples, Provenance::Simulated { seed, config_hash })
}

/// Seeded random partition: the first `⌊n·fraction⌋` of a permutation go to training.
/// Each side keeps the original sample order.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::Split(format!("train_fraction {train_fraction} must lie in (0, 1)")));
    }
    let n = ds.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(DatasetError::Split(format!("{n} samples at fraction {train_fraction} leave one side empty")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng_for(seed, stream::SPLIT, 0));
    let (mut train_idx, mut test_idx) = (order[..n_train].to_vec(), order[n_train..].to_vec());
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| idx.iter().map(|&i| ds.samples[i].clone()).collect::<Vec<_>>();
    Ok((Dataset::new(pick(&train_idx), ds.provenance.clone())?, Dataset::new(pick(&test_idx), ds.provenance.clone())?))
}

/// Permutes each vector's readings independently. The permutation for a sample
/// depends only on `(seed, sample_index)`.
pub fn shuffle_components(ds: &Dataset, seed: u64) -> Dataset {
    let samples = ds
        .samples
        .iter()
        .map(|s| {
            let mut readings = s.readings.clone();
            readings.shuffle(&mut seed::rng_for(seed, stream::COMPONENT_SHUFFLE, s.sample_index as u64));
            Sample { readings, ..s.clone() }
        })
        .collect();
    Dataset { samples, ..ds.clone() }
}

/// Draws `n` samples per setpoint without replacement, preserving order within each setpoint.
pub fn subsample_per_setpoint(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset, DatasetError> {
    let mut groups: BTreeMap<usize, Vec<&Sample>> = BTreeMap::new();
    for s in &ds.samples {
        groups.entry(s.setpoint_index).or_default().push(s);
    }
    let mut out = Vec::with_capacity(groups.len() * n);
    for (setpoint_index, members) in groups {
        if members.len() < n {
            return Err(DatasetError::Insufficient {
                setpoint_c: members[0].label_c,
                available: members.len(),
                requested: n,
            });
        }
        let mut rng = seed::rng_for(seed, stream::SUBSAMPLE, setpoint_index as u64);
        let mut chosen = index::sample(&mut rng, members.len(), n).into_vec();
        chosen.sort_unstable();
        out.extend(chosen.into_iter().map(|i| members[i].clone()));
    }
    Dataset::new(out, ds.provenance.clone())
}

/// Checks the simulated/on-disk layout of 32 readings per vector.
pub fn require_full_array(ds: &Dataset) -> Result<(), DatasetError> {
    if ds.arity() != ARRAY_SIZE {
        return Err(DatasetError::Arity { sample_index: 0, expected: ARRAY_SIZE, found: ds.arity() });
    }
    Ok(())
}
