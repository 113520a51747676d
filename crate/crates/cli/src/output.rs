//! Trace CSV and JSON writers.
//!
//! Trace files carry `#`-prefixed header metadata, then a required CSV
//! header row, then one row per sample. Decimals use '.', rows end with
//! '\n', and floats print in shortest round-trip form, so outputs are
//! byte-stable across runs.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use tactile_core::trace::TraceSample;
use tactile_core::{GraspTrace, GridDims};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const TRACE_COLUMNS: &str = "t,delta,mean_normal,max_normal,mean_shear,contact_area";

/// Metadata recorded at the top of every trace file.
#[derive(Debug, Clone)]
pub struct TraceHeader {
    pub frame_rate: f64,
    pub dims: GridDims,
    pub scenario_digest: String,
    pub seed: u64,
}

pub fn runtime_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{context}: {err}"))
}

pub fn write_trace_csv(path: &Path, trace: &GraspTrace, header: &TraceHeader) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&format!("# format_version={FORMAT_VERSION}\n"));
    text.push_str(&format!("# frame_rate={}\n", header.frame_rate));
    text.push_str(&format!(
        "# dims={}x{}@{}\n",
        header.dims.width, header.dims.height, header.dims.pitch
    ));
    text.push_str(&format!("# scenario={}\n", header.scenario_digest));
    text.push_str(&format!("# seed={}\n", header.seed));
    text.push_str(TRACE_COLUMNS);
    text.push('\n');
    for s in trace.samples() {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.t, s.delta, s.mean_normal, s.max_normal, s.mean_shear, s.contact_area
        ));
    }
    fs::write(path, text).map_err(|e| runtime_err(&path.display().to_string(), e))
}

/// Reads a trace file back: header frame rate plus the sample rows.
pub fn read_trace_csv(path: &Path) -> Result<(f64, Vec<TraceSample>), CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| runtime_err(&path.display().to_string(), e))?;
    let mut frame_rate = None;
    let mut saw_header_row = false;
    let mut samples = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("frame_rate=") {
                frame_rate = Some(value.parse::<f64>().map_err(|e| {
                    CliError::Runtime(format!("bad frame_rate in {}: {e}", path.display()))
                })?);
            }
            continue;
        }
        if !saw_header_row {
            if line != TRACE_COLUMNS {
                return Err(CliError::Runtime(format!(
                    "{}: expected header row '{TRACE_COLUMNS}', got '{line}'",
                    path.display()
                )));
            }
            saw_header_row = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CliError::Runtime(format!(
                "{}: expected 6 columns, got {}",
                path.display(),
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
        };
        samples.push(TraceSample {
            t: parse(fields[0])?,
            delta: parse(fields[1])?,
            mean_normal: parse(fields[2])?,
            max_normal: parse(fields[3])?,
            mean_shear: parse(fields[4])?,
            contact_area: fields[5]
                .parse::<usize>()
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?,
        });
    }
    let frame_rate = frame_rate
        .ok_or_else(|| CliError::Runtime(format!("{}: missing frame_rate", path.display())))?;
    if samples.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: no sample rows",
            path.display()
        )));
    }
    let dt = 1.0 / frame_rate;
    for w in samples.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 {
            return Err(CliError::Runtime(format!(
                "{}: row spacing does not match the header frame_rate",
                path.display()
            )));
        }
    }
    Ok((frame_rate, samples))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file =
        fs::File::create(path).map_err(|e| runtime_err(&path.display().to_string(), e))?;
    let mut writer = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)
        .map_err(|e| runtime_err(&path.display().to_string(), e))?;
    writer
        .write_all(b"\n")
        .map_err(|e| runtime_err(&path.display().to_string(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tactile_core::GraspTrace;

    #[test]
    fn trace_csv_round_trip() {
        let rate = 120.0;
        let samples: Vec<TraceSample> = (0..5)
            .map(|i| TraceSample {
                t: i as f64 / rate,
                delta: i as f64 * 0.1,
                mean_normal: i as f64,
                max_normal: i as f64 * 1.5,
                mean_shear: 0.25,
                contact_area: i,
            })
            .collect();
        let trace = GraspTrace::new(samples.clone(), rate).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let header = TraceHeader {
            frame_rate: rate,
            dims: GridDims::new(64, 48, 0.5).unwrap(),
            scenario_digest: "sha256:0".into(),
            seed: 0,
        };
        write_trace_csv(&path, &trace, &header).unwrap();
        let (rate_back, rows) = read_trace_csv(&path).unwrap();
        assert_eq!(rate_back, rate);
        assert_eq!(rows, samples);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains(TRACE_COLUMNS));
        assert!(text.contains("# seed=0"));
        assert!(!text.contains('\r'));
    }
}
