//! Artifact plumbing: CSV formats, JSON reports, output-path resolution.
//!
//! All writers are deterministic: floats render in their shortest
//! round-trippable form, field order is fixed, and nothing timestamps the
//! output. Running a command twice yields byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use streamlab_core::analysis::FlowRecord;
use streamlab_core::sim::AggregateSeries;
use streamlab_core::Segment;

pub const ENV_OUT_DIR: &str = "STREAMLAB_OUT_DIR";

const SEGMENT_HEADER: [&str; 3] = ["start_s", "end_s", "rate_Bps"];
const FLOW_HEADER: [&str; 2] = ["timestamp_s", "bytes"];

/// Output directory: the flag, else `$STREAMLAB_OUT_DIR`, else the current
/// directory. Created on demand.
pub fn resolve_out_dir(flag: Option<&Path>) -> Result<PathBuf> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(ENV_OUT_DIR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

/// Relative artifact paths land in the output directory; absolute paths are
/// taken as given.
pub fn artifact_path(out_dir: &Path, name: &Path) -> PathBuf {
    if name.is_absolute() {
        name.to_path_buf()
    } else {
        out_dir.join(name)
    }
}

pub fn write_segments_csv(path: &Path, segments: &[Segment]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(SEGMENT_HEADER)?;
    for seg in segments {
        w.write_record([
            seg.start.to_string(),
            seg.end.to_string(),
            seg.rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a segment CSV back. Byte counts are not part of the format; they
/// are recovered as `rate * (end - start)` rounded, which round-trips
/// exactly for traces this tool wrote.
pub fn read_segments_csv(path: &Path) -> Result<Vec<Segment>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    check_header(r.headers()?, &SEGMENT_HEADER, path)?;
    let mut segments = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let field = |j: usize| -> Result<f64> {
            row.get(j)
                .context("short row")?
                .parse::<f64>()
                .with_context(|| format!("{}: bad number in row {}", path.display(), i + 2))
        };
        let (start, end, rate) = (field(0)?, field(1)?, field(2)?);
        if !start.is_finite()
            || !end.is_finite()
            || !rate.is_finite()
            || end <= start
            || rate <= 0.0
        {
            bail!(
                "{}: row {} is not a forward transfer",
                path.display(),
                i + 2
            );
        }
        segments.push(Segment {
            start,
            end,
            rate,
            bytes: (rate * (end - start)).round() as u64,
        });
    }
    Ok(segments)
}

pub fn write_series_csv(path: &Path, series: &AggregateSeries) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["t_s", "R_Bps"])?;
    for (i, v) in series.values.iter().enumerate() {
        w.write_record([series.time_at(i).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_flow_csv(path: &Path, records: &[FlowRecord]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(FLOW_HEADER)?;
    for r in records {
        w.write_record([r.timestamp.to_string(), r.bytes.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_flow_csv(path: &Path) -> Result<Vec<FlowRecord>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    check_header(r.headers()?, &FLOW_HEADER, path)?;
    let mut records = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let context = || format!("{}: bad value in row {}", path.display(), i + 2);
        let timestamp = row
            .get(0)
            .context("short row")?
            .parse::<f64>()
            .with_context(context)?;
        let bytes = row
            .get(1)
            .context("short row")?
            .parse::<u64>()
            .with_context(context)?;
        records.push(FlowRecord { timestamp, bytes });
    }
    Ok(records)
}

fn check_header(got: &csv::StringRecord, want: &[&str], path: &Path) -> Result<()> {
    if got.iter().eq(want.iter().copied()) {
        Ok(())
    } else {
        bail!(
            "{}: expected header '{}', found '{}'",
            path.display(),
            want.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )
    }
}

/// Pretty JSON with a trailing newline; struct field order is preserved.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
