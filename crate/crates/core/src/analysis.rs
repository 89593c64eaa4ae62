//! Recovering strategy structure from observed flow records.
//!
//! The input is the coarsest artifact a passive observer can produce: a list
//! of `(timestamp, bytes)` transfer observations for one session. Analysis
//! splits them into transfer blocks separated by idle (OFF) periods, takes
//! the start of the first OFF period as the end of the buffering phase, and
//! classifies the session by the median size of its steady-state blocks.
//! Because buffering runs straight into the first paced block with no gap in
//! between, the detected buffering phase includes that first block; callers
//! comparing against a configured buffer should allow one block of slack.

use alloc::vec::Vec;

use crate::domain::{StrategyKind, SHORT_LONG_BLOCK_BOUNDARY};
use crate::error::{Error, Result};
use crate::math;
use crate::trace::{Segment, SessionTrace};

/// Default idle gap, in seconds, that separates two transfer blocks.
/// Measured OFF periods sit well above this (fractions of a second to tens
/// of seconds); packet-level jitter sits well below.
pub const DEFAULT_IDLE_GAP: f64 = 0.1;

/// Default sampling quantum for converting traces into flow records.
pub const DEFAULT_RECORD_QUANTUM: f64 = 0.01;

/// One transfer observation: `bytes` arrived in the quantum ending at
/// `timestamp` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowRecord {
    pub timestamp: f64,
    pub bytes: u64,
}

/// A maximal run of records with no idle gap inside.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Block {
    /// Timestamp of the first record in the block.
    pub start: f64,
    /// Timestamp of the last record in the block.
    pub end: f64,
    /// Sum of the member records' bytes.
    pub bytes: u64,
}

/// An idle period between two blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OffPeriod {
    pub start: f64,
    pub end: f64,
}

impl OffPeriod {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Blocks and the OFF periods between them.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segmentation {
    pub blocks: Vec<Block>,
    pub off_periods: Vec<OffPeriod>,
}

/// Split records into blocks wherever consecutive records are more than
/// `idle_gap` seconds apart. Zero-byte records carry no transfer and are
/// ignored. Empty input gives an empty segmentation, not an error.
pub fn segment_on_off(records: &[FlowRecord], idle_gap: f64) -> Result<Segmentation> {
    if !idle_gap.is_finite() || idle_gap <= 0.0 {
        return Err(Error::field("idle_gap", "must be finite and > 0"));
    }
    let mut seg = Segmentation::default();
    let mut current: Option<Block> = None;
    let mut last_ts = f64::NEG_INFINITY;
    for record in records {
        if !record.timestamp.is_finite() {
            return Err(Error::field("records", "timestamps must be finite"));
        }
        if record.timestamp < last_ts {
            return Err(Error::field("records", "timestamps must be non-decreasing"));
        }
        last_ts = record.timestamp;
        if record.bytes == 0 {
            continue;
        }
        match current.as_mut() {
            Some(block) if record.timestamp - block.end <= idle_gap => {
                block.end = record.timestamp;
                block.bytes += record.bytes;
            }
            Some(block) => {
                seg.off_periods.push(OffPeriod {
                    start: block.end,
                    end: record.timestamp,
                });
                seg.blocks.push(*block);
                *block = Block {
                    start: record.timestamp,
                    end: record.timestamp,
                    bytes: record.bytes,
                };
            }
            None => {
                current = Some(Block {
                    start: record.timestamp,
                    end: record.timestamp,
                    bytes: record.bytes,
                });
            }
        }
    }
    if let Some(block) = current {
        seg.blocks.push(block);
    }
    Ok(seg)
}

/// End of the buffering phase: the start of the first OFF period, or the end
/// of the trace when the session never pauses.
pub fn detect_buffering_end(seg: &Segmentation) -> f64 {
    match seg.off_periods.first() {
        Some(off) => off.start,
        None => seg.blocks.last().map_or(0.0, |b| b.end),
    }
}

/// Steady-state download rate relative to the encoding rate: bytes observed
/// after `buffering_end`, divided by the elapsed time and the encoding rate.
/// `None` when no steady-state span exists (nothing after buffering).
pub fn accumulation_ratio(
    records: &[FlowRecord],
    buffering_end: f64,
    encoding_rate: f64,
) -> Result<Option<f64>> {
    if !encoding_rate.is_finite() || encoding_rate <= 0.0 {
        return Err(Error::field("encoding_rate", "must be finite and > 0"));
    }
    let mut bytes: u64 = 0;
    let mut last = buffering_end;
    for record in records {
        if record.timestamp > buffering_end {
            bytes += record.bytes;
            last = last.max(record.timestamp);
        }
    }
    let span = last - buffering_end;
    if bytes == 0 || span <= 0.0 {
        return Ok(None);
    }
    Ok(Some(bytes as f64 / span / encoding_rate))
}

/// Encoding rate inferred from a fully downloaded video: total bytes over
/// playback duration.
pub fn estimate_encoding_rate(total_bytes: f64, video_duration: f64) -> Result<f64> {
    if !total_bytes.is_finite() || total_bytes < 0.0 {
        return Err(Error::field("total_bytes", "must be finite and >= 0"));
    }
    if !video_duration.is_finite() || video_duration <= 0.0 {
        return Err(Error::field("video_duration", "must be finite and > 0"));
    }
    Ok(total_bytes / video_duration)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Steady-state blocks: everything after the buffering block. Without OFF
/// periods there is no steady state at all.
fn steady_blocks(seg: &Segmentation) -> &[Block] {
    if seg.off_periods.is_empty() {
        &[]
    } else {
        &seg.blocks[1..]
    }
}

/// Classify a session by its pacing structure: no OFF periods means a bulk
/// transfer; otherwise the median steady-state block size decides between
/// the short and long regimes (boundary inclusive on the long side).
pub fn classify(seg: &Segmentation) -> StrategyKind {
    let steady = steady_blocks(seg);
    if steady.is_empty() {
        return StrategyKind::NoOnOff;
    }
    let mut sizes: Vec<f64> = steady.iter().map(|b| b.bytes as f64).collect();
    sizes.sort_by(f64::total_cmp);
    if median(&sizes) >= SHORT_LONG_BLOCK_BOUNDARY as f64 {
        StrategyKind::LongOnOff
    } else {
        StrategyKind::ShortOnOff
    }
}

/// Analyzer knobs; `Default` gives the standard gap with no rate hints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub idle_gap: f64,
    /// Known encoding rate, bytes per second. Used for the accumulation
    /// ratio when provided.
    pub encoding_rate: Option<f64>,
    /// Known playback length, seconds. Lets the analyzer estimate the
    /// encoding rate from the download volume.
    pub video_duration: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            idle_gap: DEFAULT_IDLE_GAP,
            encoding_rate: None,
            video_duration: None,
        }
    }
}

/// Everything the analyzer can say about one session.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceReport {
    pub classification: StrategyKind,
    pub total_bytes: u64,
    /// Timestamp of the last record.
    pub trace_end: f64,
    pub buffering_end: f64,
    /// Bytes in the buffering phase. Includes the first paced block, which
    /// transfers back-to-back with buffering.
    pub buffering_bytes: u64,
    pub block_count: usize,
    pub off_count: usize,
    pub median_steady_block_bytes: Option<f64>,
    pub accumulation_ratio: Option<f64>,
    pub estimated_encoding_rate: Option<f64>,
    /// Interquartile range of steady block sizes over their median. Large
    /// values mean the session mixes block-size regimes.
    pub block_size_dispersion: Option<f64>,
    /// Set when `block_size_dispersion` exceeds 1: the classification is
    /// still the median rule, but treat it with care.
    pub mixed_regime: bool,
    /// Set when a quarter or more of the OFF periods fall within twice the
    /// idle gap: the block boundaries are then sensitive to the gap choice.
    pub off_durations_near_gap: bool,
    pub blocks: Vec<Block>,
    pub off_periods: Vec<OffPeriod>,
}

/// Run the full analysis pipeline over one session's records.
pub fn analyze(records: &[FlowRecord], options: &AnalysisOptions) -> Result<TraceReport> {
    let seg = segment_on_off(records, options.idle_gap)?;
    if let Some(e) = options.encoding_rate {
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::field("encoding_rate", "must be finite and > 0"));
        }
    }
    let total_bytes: u64 = records.iter().map(|r| r.bytes).sum();
    let trace_end = seg.blocks.last().map_or(0.0, |b| b.end);
    let buffering_end = detect_buffering_end(&seg);
    let buffering_bytes = if seg.off_periods.is_empty() {
        total_bytes
    } else {
        seg.blocks[0].bytes
    };

    let estimated_encoding_rate = match options.video_duration {
        Some(d) => Some(estimate_encoding_rate(total_bytes as f64, d)?),
        None => None,
    };
    let effective_rate = options.encoding_rate.or(estimated_encoding_rate);
    let ratio = match effective_rate {
        Some(e) => accumulation_ratio(records, buffering_end, e)?,
        None => None,
    };

    let steady = steady_blocks(&seg);
    let mut sizes: Vec<f64> = steady.iter().map(|b| b.bytes as f64).collect();
    sizes.sort_by(f64::total_cmp);
    let median_steady = (!sizes.is_empty()).then(|| median(&sizes));
    // Tukey hinges: quartiles are the medians of the lower and upper halves.
    let dispersion = (sizes.len() >= 2).then(|| {
        let half = sizes.len() / 2;
        let lower = &sizes[..half];
        let upper = &sizes[sizes.len() - half..];
        let iqr = median(upper) - median(lower);
        let m = median(&sizes);
        if m > 0.0 {
            iqr / m
        } else {
            0.0
        }
    });

    let near_gap = seg
        .off_periods
        .iter()
        .filter(|o| o.duration() <= 2.0 * options.idle_gap)
        .count();
    let off_durations_near_gap =
        !seg.off_periods.is_empty() && 4 * near_gap >= seg.off_periods.len();

    Ok(TraceReport {
        classification: classify(&seg),
        total_bytes,
        trace_end,
        buffering_end,
        buffering_bytes,
        block_count: seg.blocks.len(),
        off_count: seg.off_periods.len(),
        median_steady_block_bytes: median_steady,
        accumulation_ratio: ratio,
        estimated_encoding_rate,
        block_size_dispersion: dispersion,
        mixed_regime: dispersion.is_some_and(|d| d > 1.0),
        off_durations_near_gap,
        blocks: seg.blocks,
        off_periods: seg.off_periods,
    })
}

/// Sample a trace's segments into flow records on a fixed quantum grid.
///
/// Each record carries the bytes transferred in the quantum ending at its
/// timestamp; empty quanta produce no record. Byte counts are allocated from
/// each segment's exact total, so the records conserve every byte and block
/// sums are exact at idle boundaries.
pub fn records_from_segments(segments: &[Segment], quantum: f64) -> Result<Vec<FlowRecord>> {
    if !quantum.is_finite() || quantum <= 0.0 {
        return Err(Error::field("quantum", "must be finite and > 0"));
    }
    let mut records: Vec<FlowRecord> = Vec::new();
    let mut last_bin: Option<u64> = None;
    for seg in segments {
        if seg.bytes == 0 {
            continue;
        }
        if !seg.start.is_finite() || !seg.end.is_finite() || seg.end <= seg.start {
            return Err(Error::field("segments", "zero-length transferring segment"));
        }
        let mut emitted: u64 = 0;
        // Nudge guards against boundary starts landing one bin early.
        let mut bin = math::floor(seg.start / quantum + 1e-6) as u64;
        loop {
            let bin_end = (bin + 1) as f64 * quantum;
            let bytes_here = if bin_end >= seg.end {
                seg.bytes - emitted
            } else {
                let cum = math::round(seg.rate * (bin_end - seg.start))
                    .min(seg.bytes as f64)
                    .max(emitted as f64) as u64;
                cum - emitted
            };
            if bytes_here > 0 {
                emitted += bytes_here;
                match records.last_mut() {
                    Some(last) if last_bin == Some(bin) => last.bytes += bytes_here,
                    _ => {
                        records.push(FlowRecord {
                            timestamp: bin_end,
                            bytes: bytes_here,
                        });
                        last_bin = Some(bin);
                    }
                }
            }
            if bin_end >= seg.end {
                break;
            }
            bin += 1;
        }
    }
    Ok(records)
}

/// Convenience wrapper over [`records_from_segments`] for a whole trace.
pub fn records_from_trace(trace: &SessionTrace, quantum: f64) -> Result<Vec<FlowRecord>> {
    records_from_segments(&trace.segments, quantum)
}
