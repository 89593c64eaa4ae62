//! Per-session download traces.
//!
//! A session's transfer is modelled as a fluid process: an initial buffering
//! phase at the full ON rate, then (for paced strategies) ON-OFF cycles that
//! move one block per cycle so the long-run rate settles at
//! `accumulation_ratio * encoding_rate`. The trace is the list of
//! transferring segments; OFF periods are the gaps between them.
//!
//! Byte bookkeeping is integral: the video size is rounded to whole bytes
//! once, and every segment carries the exact byte count it transfers, so the
//! segment total always reconstructs the video size with zero drift.

use alloc::vec::Vec;

use crate::domain::{StrategyConfig, VideoParams};
use crate::error::{Error, Result};

/// One contiguous transferring interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    /// Start time in seconds from session start.
    pub start: f64,
    /// End time in seconds from session start (exclusive).
    pub end: f64,
    /// Transfer rate in bytes per second while the segment is active.
    pub rate: f64,
    /// Exact bytes moved by this segment.
    pub bytes: u64,
}

/// A complete single-session download schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SessionTrace {
    pub video: VideoParams,
    pub config: StrategyConfig,
    /// Transferring segments, sorted, non-overlapping; gaps are OFF periods.
    pub segments: Vec<Segment>,
    /// End of the last transferring segment.
    pub download_duration: f64,
}

impl SessionTrace {
    /// Total bytes across segments. Exactly `video.size_bytes()` for traces
    /// produced by [`build_trace`].
    pub fn total_bytes(&self) -> u64 {
        self.segments.iter().map(|s| s.bytes).sum()
    }

    /// Cumulative bytes downloaded by time `t` (seconds from session start).
    /// Monotone in `t`; complete segments contribute their exact byte count,
    /// the active segment contributes fluid `rate * elapsed`.
    pub fn downloaded_by(&self, t: f64) -> f64 {
        let mut done: u64 = 0;
        let mut partial = 0.0_f64;
        for seg in &self.segments {
            if t >= seg.end {
                done += seg.bytes;
            } else {
                if t > seg.start {
                    partial = seg.rate * (t - seg.start);
                }
                break;
            }
        }
        done as f64 + partial
    }

    /// Integral of the squared rate over the whole trace. For a fluid ON-OFF
    /// source this equals `size * on_rate`, which is what makes the aggregate
    /// variance formula work; tests hold the two routes against each other.
    pub fn integral_rate_squared(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.rate * s.rate * (s.end - s.start))
            .sum()
    }

    /// Copy of the trace cut off once `cap` cumulative bytes have been
    /// downloaded. Used for viewer interruptions. A cap at or above the total
    /// returns the trace unchanged.
    pub fn truncate_at_bytes(&self, cap: u64) -> SessionTrace {
        if cap >= self.total_bytes() {
            return self.clone();
        }
        let mut segments = Vec::new();
        let mut remaining = cap;
        for seg in &self.segments {
            if remaining == 0 {
                break;
            }
            if seg.bytes <= remaining {
                segments.push(*seg);
                remaining -= seg.bytes;
            } else {
                let span = remaining as f64 / seg.rate;
                segments.push(Segment {
                    start: seg.start,
                    end: seg.start + span,
                    rate: seg.rate,
                    bytes: remaining,
                });
                remaining = 0;
            }
        }
        let download_duration = segments.last().map_or(0.0, |s| s.end);
        SessionTrace {
            video: self.video,
            config: self.config,
            segments,
            download_duration,
        }
    }
}

/// Steady-state download rate of a paced strategy for a given video:
/// `accumulation_ratio * encoding_rate`. Not defined for bulk transfers.
pub fn steady_rate(config: &StrategyConfig, video: &VideoParams) -> Result<f64> {
    match config.on_off() {
        Some(p) => Ok(p.accumulation_ratio * video.encoding_rate),
        None => Err(Error::NotOnOff),
    }
}

/// Download duration without materializing the segments. Matches
/// `build_trace(..).download_duration` exactly; handy for warmup bounds.
pub fn session_download_duration(video: &VideoParams, config: &StrategyConfig) -> Result<f64> {
    Ok(plan(video, config)?.duration)
}

struct Plan {
    buffer_bytes: u64,
    full_blocks: u64,
    partial_bytes: u64,
    period: f64,
    on_duration: f64,
    duration: f64,
    /// Everything in one continuous segment (bulk, tiny video, or an ON rate
    /// that cannot outrun the steady rate).
    continuous: bool,
}

fn plan(video: &VideoParams, config: &StrategyConfig) -> Result<Plan> {
    config.validate()?;
    let total = video.size_bytes();
    if total == 0 {
        return Err(Error::field(
            "video",
            "size rounds to zero bytes; nothing to transfer",
        ));
    }
    let g = config.on_rate();
    let continuous = Plan {
        buffer_bytes: total,
        full_blocks: 0,
        partial_bytes: 0,
        period: 0.0,
        on_duration: 0.0,
        duration: total as f64 / g,
        continuous: true,
    };
    let Some(p) = config.on_off() else {
        return Ok(continuous);
    };
    let steady = p.accumulation_ratio * video.encoding_rate;
    // No headroom over the steady rate: pacing degenerates, the transfer
    // simply runs at the available rate with no OFF periods.
    if g <= steady {
        return Ok(continuous);
    }
    let buffer_bytes = p.buffer.bytes_rounded(video).min(total);
    let remaining = total - buffer_bytes;
    if remaining == 0 {
        return Ok(continuous);
    }
    let q = p.block_size;
    let period = q as f64 / steady;
    let on_duration = q as f64 / g;
    let full_blocks = remaining / q;
    let partial_bytes = remaining % q;
    let buffering_time = buffer_bytes as f64 / g;
    let duration = if partial_bytes > 0 {
        buffering_time + full_blocks as f64 * period + partial_bytes as f64 / g
    } else {
        // The last full block carries no trailing OFF.
        buffering_time + (full_blocks - 1) as f64 * period + on_duration
    };
    Ok(Plan {
        buffer_bytes,
        full_blocks,
        partial_bytes,
        period,
        on_duration,
        duration,
        continuous: false,
    })
}

/// Build the download trace of one session.
///
/// Bulk transfers give a single segment covering the whole file. Paced
/// strategies buffer first, then emit one ON segment per block; each block's
/// start is computed from the cycle index (not accumulated), so timing does
/// not drift over long sessions. The final block may be partial and never
/// has a trailing OFF.
pub fn build_trace(video: &VideoParams, config: &StrategyConfig) -> Result<SessionTrace> {
    let plan = plan(video, config)?;
    let g = config.on_rate();
    let total = video.size_bytes();
    let mut segments = Vec::new();

    if plan.continuous {
        segments.push(Segment {
            start: 0.0,
            end: total as f64 / g,
            rate: g,
            bytes: total,
        });
    } else {
        segments.reserve(1 + plan.full_blocks as usize + 1);
        let mut buffering_time = 0.0;
        if plan.buffer_bytes > 0 {
            buffering_time = plan.buffer_bytes as f64 / g;
            segments.push(Segment {
                start: 0.0,
                end: buffering_time,
                rate: g,
                bytes: plan.buffer_bytes,
            });
        }
        let q = config.on_off().expect("paced plan").block_size;
        for cycle in 0..plan.full_blocks {
            let start = buffering_time + cycle as f64 * plan.period;
            segments.push(Segment {
                start,
                end: start + plan.on_duration,
                rate: g,
                bytes: q,
            });
        }
        if plan.partial_bytes > 0 {
            let start = buffering_time + plan.full_blocks as f64 * plan.period;
            segments.push(Segment {
                start,
                end: start + plan.partial_bytes as f64 / g,
                rate: g,
                bytes: plan.partial_bytes,
            });
        }
    }

    let download_duration = segments.last().map_or(0.0, |s| s.end);
    Ok(SessionTrace {
        video: *video,
        config: *config,
        segments,
        download_duration,
    })
}
