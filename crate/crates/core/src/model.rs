//! Closed-form model of superposed streaming sessions.
//!
//! Sessions arrive as a Poisson process of rate `lambda` and each downloads
//! `e * L` bytes (encoding rate times length), so the aggregate rate process
//! has mean `lambda * E[e] * E[L]`. Because a fluid ON-OFF source transfers
//! at its ON rate `G` or not at all, the integral of its squared rate is
//! `e * L * G`, which gives the aggregate variance `lambda * E[e] * E[L] * E[G]`.
//! Both results are independent of buffer sizes, block sizes, and pacing,
//! which is what the simulator reproduces.
//!
//! The interruption model covers viewers who stop watching at time
//! `tau = beta * L`: the player has by then fetched the buffer plus
//! `steady_rate * tau` bytes (capped at the file size), and everything beyond
//! `e * tau` was downloaded for nothing.

use crate::domain;
use crate::domain::{BufferSpec, DistributionSpec, VideoParams};
use crate::error::{Error, Result};
use crate::math;

fn require_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::field(field, "must be finite"))
    }
}

fn require_non_negative(field: &'static str, v: f64) -> Result<()> {
    require_finite(field, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::field(field, "must be >= 0"))
    }
}

fn require_positive(field: &'static str, v: f64) -> Result<()> {
    require_finite(field, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::field(field, "must be > 0"))
    }
}

/// Mean aggregate download rate in bytes per second:
/// `arrival_rate * mean_encoding_rate * mean_duration`.
pub fn mean_aggregate_rate(
    arrival_rate: f64,
    mean_encoding_rate: f64,
    mean_duration: f64,
) -> Result<f64> {
    require_non_negative("arrival_rate", arrival_rate)?;
    require_positive("mean_encoding_rate", mean_encoding_rate)?;
    require_positive("mean_duration", mean_duration)?;
    Ok(arrival_rate * mean_encoding_rate * mean_duration)
}

/// Variance of the aggregate rate: the mean scaled by the mean ON rate.
/// Holds for any pacing schedule, as long as transfers run at `G` or pause.
pub fn variance_aggregate_rate(
    arrival_rate: f64,
    mean_encoding_rate: f64,
    mean_duration: f64,
    mean_on_rate: f64,
) -> Result<f64> {
    require_positive("mean_on_rate", mean_on_rate)?;
    Ok(mean_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration)? * mean_on_rate)
}

/// Link capacity sized as mean plus `alpha` standard deviations.
/// `alpha` below 1 leaves no headroom at all and is rejected.
pub fn dimension_link(
    arrival_rate: f64,
    mean_encoding_rate: f64,
    mean_duration: f64,
    mean_on_rate: f64,
    alpha: f64,
) -> Result<f64> {
    require_finite("alpha", alpha)?;
    if alpha < 1.0 {
        return Err(Error::field("alpha", "must be >= 1"));
    }
    let mean = mean_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration)?;
    let variance = variance_aggregate_rate(
        arrival_rate,
        mean_encoding_rate,
        mean_duration,
        mean_on_rate,
    )?;
    Ok(mean + alpha * math::sqrt(variance))
}

/// Outcome of the early-interruption check for one session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterruptionCheck {
    /// True when the viewer walks away before the download finishes, i.e.
    /// the file holds more bytes than buffering plus steady pacing deliver
    /// by the stop time.
    pub interrupts_before_complete: bool,
    /// True when the bytes on hand at the stop time at least cover playback
    /// up to that point. False flags a configuration that would stall.
    pub playback_feasible: bool,
}

/// Check whether a viewer stopping at `watch_time` seconds aborts a download
/// still in flight. `buffer_bytes` is the buffering target and `steady_rate`
/// the paced download rate after buffering.
pub fn check_interruption(
    encoding_rate: f64,
    duration: f64,
    buffer_bytes: f64,
    steady_rate: f64,
    watch_time: f64,
) -> Result<InterruptionCheck> {
    require_positive("encoding_rate", encoding_rate)?;
    require_positive("duration", duration)?;
    require_non_negative("buffer_bytes", buffer_bytes)?;
    require_positive("steady_rate", steady_rate)?;
    require_non_negative("watch_time", watch_time)?;
    let size = encoding_rate * duration;
    let fetched_by_stop = buffer_bytes + steady_rate * watch_time;
    Ok(InterruptionCheck {
        interrupts_before_complete: size > fetched_by_stop,
        playback_feasible: fetched_by_stop >= encoding_rate * watch_time,
    })
}

/// Shortest video length (seconds) that a viewer watching a fraction
/// `watched_fraction` of it still fails to download completely:
/// `buffer_playback / (1 - k * beta)`.
///
/// When `k * beta >= 1` pacing runs ahead of every viewer and no finite
/// length interrupts; that is reported as `f64::INFINITY` rather than an
/// error so callers can print it distinctly.
pub fn full_download_length_threshold(
    buffer_playback: f64,
    accumulation_ratio: f64,
    watched_fraction: f64,
) -> Result<f64> {
    require_non_negative("buffer_playback", buffer_playback)?;
    require_finite("accumulation_ratio", accumulation_ratio)?;
    if accumulation_ratio < 1.0 {
        return Err(Error::field("accumulation_ratio", "must be >= 1"));
    }
    require_finite("watched_fraction", watched_fraction)?;
    if !(watched_fraction > 0.0 && watched_fraction < 1.0) {
        return Err(Error::field("watched_fraction", "must lie in (0, 1)"));
    }
    let kb = accumulation_ratio * watched_fraction;
    if kb >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(buffer_playback / (1.0 - kb))
}

/// Bytes a single interrupted session downloads but never plays:
/// `min(buffer + steady_rate * watch_time, size) - encoding_rate * watch_time`.
pub fn unused_session_bytes(
    encoding_rate: f64,
    duration: f64,
    buffer_bytes: f64,
    steady_rate: f64,
    watch_time: f64,
) -> Result<f64> {
    require_positive("encoding_rate", encoding_rate)?;
    require_positive("duration", duration)?;
    require_non_negative("buffer_bytes", buffer_bytes)?;
    require_positive("steady_rate", steady_rate)?;
    require_non_negative("watch_time", watch_time)?;
    let size = encoding_rate * duration;
    let downloaded = (buffer_bytes + steady_rate * watch_time).min(size);
    Ok((downloaded - encoding_rate * watch_time).max(0.0))
}

/// Seed for the sampling fallback below; fixed so results are reproducible.
const WASTE_SAMPLING_SEED: u64 = 0x5EED_57E5_0000_0001;
/// Sample count for the fallback: relative error around 0.2 percent.
const WASTE_SAMPLES: u32 = 1 << 19;

/// Mean rate of wasted traffic when every viewer watches a sampled fraction
/// `beta` of a sampled video and then stops.
///
/// Each session wastes `min(B + k*e*beta*L, e*L) - e*beta*L` bytes, where `B`
/// is the buffer for that video; the wasted rate is the arrival rate times
/// the expectation over `(e, L, beta)`, drawn independently.
///
/// The expectation is evaluated exactly when all three distributions have
/// finite support (constants and weighted atoms). Otherwise it falls back to
/// seeded Monte Carlo sampling with 2^19 draws, which is deterministic but
/// carries sampling error of roughly 0.2 percent.
pub fn mean_wasted_rate(
    arrival_rate: f64,
    encoding_rate: &DistributionSpec,
    duration: &DistributionSpec,
    watched_fraction: &DistributionSpec,
    buffer: &BufferSpec,
    accumulation_ratio: f64,
) -> Result<f64> {
    require_non_negative("arrival_rate", arrival_rate)?;
    require_finite("accumulation_ratio", accumulation_ratio)?;
    if accumulation_ratio < 1.0 {
        return Err(Error::field("accumulation_ratio", "must be >= 1"));
    }
    buffer.validate()?;
    encoding_rate.validate()?;
    duration.validate()?;
    watched_fraction.validate()?;
    let (e_lo, _) = encoding_rate.support()?;
    if e_lo <= 0.0 {
        return Err(Error::field("encoding_rate", "support must be > 0"));
    }
    let (l_lo, _) = duration.support()?;
    if l_lo <= 0.0 {
        return Err(Error::field("duration", "support must be > 0"));
    }
    let (b_lo, b_hi) = watched_fraction.support()?;
    if !(b_lo > 0.0 && b_hi < 1.0) {
        return Err(Error::field(
            "watched_fraction",
            "support must lie in (0, 1)",
        ));
    }

    let per_session = |e: f64, l: f64, beta: f64| -> f64 {
        let video = VideoParams {
            encoding_rate: e,
            duration: l,
        };
        let buffer_bytes = buffer.bytes(&video);
        let steady = accumulation_ratio * e;
        let tau = beta * l;
        let size = e * l;
        ((buffer_bytes + steady * tau).min(size) - e * tau).max(0.0)
    };

    let exact = (
        encoding_rate.atoms(),
        duration.atoms(),
        watched_fraction.atoms(),
    );
    let expectation = if let (Some(es), Some(ls), Some(bs)) = exact {
        let mut acc = 0.0;
        for (e, we) in &es {
            for (l, wl) in &ls {
                for (b, wb) in &bs {
                    acc += we * wl * wb * per_session(*e, *l, *b);
                }
            }
        }
        acc
    } else {
        let mut rng = domain::session_rng(WASTE_SAMPLING_SEED, 0);
        let mut acc = 0.0;
        for _ in 0..WASTE_SAMPLES {
            let e = encoding_rate.sample(&mut rng)?;
            let l = duration.sample(&mut rng)?;
            let b = watched_fraction.sample(&mut rng)?;
            acc += per_session(e, l, b);
        }
        acc / WASTE_SAMPLES as f64
    };
    Ok(arrival_rate * expectation)
}
