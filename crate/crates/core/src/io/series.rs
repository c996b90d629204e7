//! `timestamp,value` CSV series and horizon resampling.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::num::NonZeroUsize;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};

use super::{IoError, Location};
use crate::timeseries::{SeriesError, TimeSeries, Unit};

/// Formats a UTC timestamp as `2019-01-01T00:00:00Z`.
pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Parses an RFC 3339 timestamp with a zero UTC offset.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    let t = DateTime::parse_from_rfc3339(s.trim()).map_err(|e| format!("bad timestamp {s:?}: {e}"))?;
    if t.offset().local_minus_utc() != 0 {
        return Err(format!("timestamp {s:?} is not UTC"));
    }
    Ok(t.with_timezone(&Utc))
}

/// Parses a finite decimal number.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite number {s:?}"));
    }
    Ok(v)
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    // Display never uses exponent notation and round-trips exactly.
    let s = format!("{v}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Reads a series from `path`; see [`parse_timeseries_csv`].
pub fn read_timeseries_csv(path: &Path, unit: Unit) -> Result<TimeSeries, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    parse_timeseries_csv(file, unit).map_err(|e| e.in_file(path))
}

/// Parses `timestamp,value` CSV: UTC timestamps, strictly increasing with a
/// uniform step, values checked against `unit`. Line numbers in errors are
/// 1-based and count the header.
pub fn parse_timeseries_csv<R: Read>(reader: R, unit: Unit) -> Result<TimeSeries, IoError> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| IoError::parse(1, e.to_string()))?,
        None => return Err(IoError::parse(1, "empty file")),
    };
    let header = header.trim_start_matches('\u{feff}').trim_end_matches('\r');
    if header != "timestamp,value" {
        return Err(IoError::parse(1, format!("expected header `timestamp,value`, got {header:?}")));
    }

    let mut start = None;
    let mut step: Option<TimeDelta> = None;
    let mut prev: Option<DateTime<Utc>> = None;
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let line = line.map_err(|e| IoError::parse(line_no, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(IoError::parse(line_no, format!("expected 2 fields, got {}", fields.len())));
        }
        let t = parse_timestamp(fields[0]).map_err(|r| IoError::parse(line_no, r))?;
        let v = parse_number(fields[1]).map_err(|r| IoError::parse(line_no, r))?;
        if let Some((lo, hi)) = unit.valid_range() {
            if v < lo || v > hi {
                return Err(IoError::Range {
                    path: Location::default(),
                    line: line_no,
                    value: v,
                    unit,
                });
            }
        }
        if let Some(p) = prev {
            let d = t - p;
            if d <= TimeDelta::zero() {
                return Err(IoError::gap(line_no, "timestamps not strictly increasing"));
            }
            match step {
                None => step = Some(d),
                Some(s) if s != d => {
                    return Err(IoError::gap(line_no, format!("step {d} differs from {s}")));
                }
                _ => {}
            }
        } else {
            start = Some(t);
        }
        prev = Some(t);
        values.push(v);
    }
    let start = start.ok_or_else(|| IoError::parse(2, "no data rows"))?;
    // A single row carries no step; hourly is the native cadence.
    let step = step.unwrap_or(TimeDelta::hours(1));
    TimeSeries::new(start, step, values, unit).map_err(|e| IoError::parse(0, e.to_string()))
}

/// Writes `ts` as `timestamp,value` CSV.
pub fn write_timeseries_csv<W: Write>(ts: &TimeSeries, mut w: W) -> std::io::Result<()> {
    let mut out = String::with_capacity(32 * ts.len() + 16);
    out.push_str("timestamp,value\n");
    for (t, v) in ts.timestamps().zip(ts.values()) {
        out.push_str(&format_timestamp(t));
        out.push(',');
        out.push_str(&format_number(*v));
        out.push('\n');
    }
    w.write_all(out.as_bytes())
}

/// Writes `ts` to `path`.
pub fn save_timeseries_csv(ts: &TimeSeries, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_timeseries_csv(ts, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| IoError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMode {
    /// Average of each group; preserves `Σ value·step`.
    Mean,
    /// First sample of each group.
    Decimate,
}

/// Groups `factor` consecutive samples into one with `factor` times the
/// step. A trailing partial group is dropped with a warning; the result is
/// `Err(Empty)` only when the series is shorter than `factor`.
pub fn resample(
    ts: &TimeSeries,
    factor: NonZeroUsize,
    mode: ResampleMode,
) -> Result<TimeSeries, SeriesError> {
    let f = factor.get();
    if f == 1 {
        return Ok(ts.clone());
    }
    let rem = ts.len() % f;
    if rem != 0 {
        log::warn!("resample: dropping {rem} trailing samples (length {} not divisible by {f})", ts.len());
    }
    let values: Vec<f64> = ts
        .values()
        .chunks_exact(f)
        .map(|c| match mode {
            ResampleMode::Mean => c.iter().sum::<f64>() / f as f64,
            ResampleMode::Decimate => c[0],
        })
        .collect();
    TimeSeries::new(ts.start(), ts.step() * f as i32, values, ts.unit())
}
