use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{index_setpoints, Dataset, DatasetError, Provenance, Sample};
use crate::sensor::ARRAY_SIZE;

/// Fixed decimal places for every value on disk; represents the 0.0625 °C grid exactly.
pub const CSV_DECIMALS: usize = 4;

fn header() -> Vec<String> {
    std::iter::once("set_temp_c".to_string()).chain((0..ARRAY_SIZE).map(|i| format!("s{i:02}"))).collect()
}

/// Writes `set_temp_c,s00,…,s31` followed by one row per sample.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<(), DatasetError> {
    super::require_full_array(ds)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header())?;
    for s in ds.samples() {
        let row = std::iter::once(&s.label_c).chain(&s.readings).map(|v| format!("{v:.prec$}", prec = CSV_DECIMALS));
        w.write_record(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses a dataset written by [`write_csv`]. Sample indices follow row order and
/// setpoint indices are the rank of each label among the distinct labels.
pub fn read_csv<R: Read>(input: R, source: &str) -> Result<Dataset, DatasetError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header().iter().map(String::as_str)) {
        return Err(DatasetError::Parse { line: 1, message: "unexpected header".into() });
    }
    let mut samples = Vec::new();
    for (sample_index, record) in r.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != ARRAY_SIZE + 1 {
            return Err(DatasetError::Parse {
                line,
                message: format!("expected {} readings, found {}", ARRAY_SIZE, record.len().saturating_sub(1)),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| DatasetError::Parse {
                    line,
                    message: format!("column {}: non-numeric value {field:?}", col + 1),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        samples.push(Sample { label_c: values[0], readings: values[1..].to_vec(), setpoint_index: 0, sample_index });
    }
    index_setpoints(&mut samples);
    Dataset::new(samples, Provenance::Ingested { source: source.to_string() })
}

pub fn write_csv_file(ds: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let io = |source| DatasetError::Io { path: path.to_path_buf(), source };
    let mut file = BufWriter::new(File::create(path).map_err(io)?);
    write_csv(ds, &mut file)?;
    file.flush().map_err(io)
}

pub fn read_csv_file(path: &Path) -> Result<Dataset, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    read_csv(BufReader::new(file), &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_rows() -> Dataset {
        let samples = (0..2)
            .map(|i| Sample {
                readings: (0..32).map(|j| 30.0 + j as f64 * 0.0625 + i as f64).collect(),
                label_c: 30.0 + i as f64,
                setpoint_index: i,
                sample_index: i,
            })
            .collect();
        Dataset::new(samples, Provenance::Ingested { source: "mem".into() }).unwrap()
    }

    #[test]
    fn roundtrip_and_layout() {
        let ds = two_rows();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("set_temp_c,s00,s01,"));
        assert!(first.ends_with(",s31"));
        assert_eq!(text.lines().count(), 3);
        assert!(!text.contains('\r'));
        assert!(text.lines().nth(1).unwrap().starts_with("30.0000,30.0000,30.0625,"));
        let back = read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.samples(), ds.samples());
    }

    #[test]
    fn short_row_names_its_line() {
        let mut text = header().join(",");
        text.push('\n');
        text.push_str(&vec!["1.0"; 33].join(","));
        text.push('\n');
        text.push_str(&vec!["1.0"; 32].join(","));
        text.push('\n');
        match read_csv(text.as_bytes(), "t") {
            Err(DatasetError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("found 31"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_is_rejected() {
        let mut text = header().join(",");
        text.push('\n');
        let mut row = vec!["1.0"; 33];
        row[5] = "abc";
        text.push_str(&row.join(","));
        assert!(matches!(read_csv(text.as_bytes(), "t"), Err(DatasetError::Parse { line: 2, .. })));
        assert!(matches!(read_csv("a,b\n".as_bytes(), "t"), Err(DatasetError::Parse { line: 1, .. })));
    }
}
