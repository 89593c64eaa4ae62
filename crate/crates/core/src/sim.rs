//! Monte-Carlo superposition of streaming sessions.
//!
//! Sessions arrive as a Poisson process; each samples its video parameters
//! from the workload's distributions, builds its download trace, and adds it
//! to the aggregate rate series `R(t)` on a uniform grid. Each grid bin holds
//! the average rate over that bin, so integrating the series recovers the
//! deposited bytes exactly and the empirical mean is insensitive to the bin
//! width.
//!
//! Statistics are taken over `[warmup, horizon]` only. The warmup must cover
//! the longest possible single-session download, otherwise the window would
//! see the ramp-up of an empty system; `simulate` refuses shorter warmups
//! unless explicitly overridden.
//!
//! With an interruption model attached, each session also samples the
//! fraction of the video its viewer actually watches, truncating the trace
//! once the bytes fetched by the stop moment are delivered and booking the
//! surplus as waste.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{
    arrival_rng, poisson_arrivals, session_rng, DistributionSpec, StrategyConfig, VideoParams,
};
use crate::error::{Error, Result};
use crate::math;
use crate::model;
use crate::trace::{build_trace, session_download_duration, Segment, SessionTrace};

/// Default sampling step of the aggregate grid, in seconds.
pub const DEFAULT_DT: f64 = 0.01;

/// A complete workload description for one simulation run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorkloadSpec {
    /// Session arrival rate in sessions per second.
    pub arrival_rate: f64,
    /// Per-session encoding rate draw, bytes per second.
    pub encoding_rate: DistributionSpec,
    /// Per-session video length draw, seconds.
    pub duration: DistributionSpec,
    /// Optional viewer model: fraction of the video watched before stopping,
    /// strictly inside (0, 1). `None` means every video plays to the end.
    pub watched_fraction: Option<DistributionSpec>,
    /// Download strategy applied to every session.
    pub strategy: StrategyConfig,
    /// End of simulated time, seconds.
    pub horizon: f64,
    /// Start of the measurement window, seconds.
    pub warmup: f64,
    /// Master seed; arrivals and each session derive their own streams.
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.arrival_rate.is_finite() || self.arrival_rate < 0.0 {
            return Err(Error::field("arrival_rate", "must be finite and >= 0"));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::field("horizon", "must be finite and > 0"));
        }
        if !self.warmup.is_finite() || self.warmup < 0.0 {
            return Err(Error::field("warmup", "must be finite and >= 0"));
        }
        if self.warmup >= self.horizon {
            return Err(Error::field("warmup", "must be smaller than horizon"));
        }
        let (e_lo, e_hi) = self.encoding_rate.support()?;
        if e_lo <= 0.0 {
            return Err(Error::field("encoding_rate", "support must be > 0"));
        }
        let (l_lo, l_hi) = self.duration.support()?;
        if l_lo <= 0.0 {
            return Err(Error::field("duration", "support must be > 0"));
        }
        // The strategy must be feasible for the fastest video it can meet.
        let worst_video = VideoParams::new(e_hi, l_hi)?;
        self.strategy.validate_for(&worst_video)?;
        if let Some(beta) = &self.watched_fraction {
            let (b_lo, b_hi) = beta.support()?;
            if !(b_lo > 0.0 && b_hi < 1.0) {
                return Err(Error::field(
                    "interruption",
                    "watched fraction support must lie in (0, 1)",
                ));
            }
        }
        Ok(())
    }

    /// Upper bound on any single session's download duration under this
    /// workload. Download time grows with both video length and encoding
    /// rate, so the support corners bound it; one pacing period at the
    /// slowest steady rate covers the block-quantization wiggle in between.
    pub fn max_session_duration(&self) -> Result<f64> {
        let (e_lo, e_hi) = self.encoding_rate.support()?;
        let (_, l_hi) = self.duration.support()?;
        let mut worst = 0.0_f64;
        for e in [e_lo, e_hi] {
            let video = VideoParams::new(e, l_hi)?;
            worst = worst.max(session_download_duration(&video, &self.strategy)?);
        }
        if let Some(p) = self.strategy.on_off() {
            if e_lo < e_hi {
                worst += p.block_size as f64 / (p.accumulation_ratio * e_lo);
            }
        }
        Ok(worst)
    }
}

/// Grid and guard settings for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Grid step in seconds.
    pub dt: f64,
    /// Accept a warmup shorter than the longest session download. Meant for
    /// quick looks and smoke tests; steady-state statistics will be biased.
    pub allow_short_warmup: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: DEFAULT_DT,
            allow_short_warmup: false,
        }
    }
}

/// Aggregate rate series on a uniform grid. `values[i]` is the average rate
/// over `[i * dt, (i+1) * dt)` in bytes per second.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AggregateSeries {
    pub dt: f64,
    pub warmup: f64,
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl AggregateSeries {
    /// Start time of bin `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Index of the first bin inside the measurement window.
    pub fn measurement_start(&self) -> usize {
        math::ceil(self.warmup / self.dt - 1e-9) as usize
    }

    /// Bins inside the measurement window.
    pub fn window(&self) -> &[f64] {
        &self.values[self.measurement_start().min(self.values.len())..]
    }

    /// Time-average of the rate and of the squared rate over the window.
    pub fn window_stats(&self) -> (f64, f64) {
        let window = self.window();
        if window.is_empty() {
            return (0.0, 0.0);
        }
        let n = window.len() as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for &v in window {
            sum += v;
            sum_sq += v * v;
        }
        (sum / n, sum_sq / n)
    }
}

/// Result of one run (or a pool of replications; see [`pool_summaries`]).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimSummary {
    /// Every master seed that contributed.
    pub seeds: Vec<u64>,
    pub session_count: u64,
    pub interrupted_count: u64,
    /// Time-average aggregate rate over the window, bytes per second.
    pub empirical_mean: f64,
    /// Time-average of the squared rate; kept so pooling stays exact.
    pub empirical_second_moment: f64,
    /// `second_moment - mean^2`, floored at zero.
    pub empirical_variance: f64,
    /// Wasted bytes per second of window time (zero without an
    /// interruption model).
    pub wasted_mean: f64,
}

fn grid_bins(horizon: f64, dt: f64) -> Result<usize> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::field("dt", "must be finite and > 0"));
    }
    let n = math::floor(horizon / dt + 1e-9) as usize;
    if n == 0 {
        return Err(Error::field("dt", "horizon is shorter than one grid step"));
    }
    Ok(n)
}

/// Add one segment of a session arriving at `arrival` onto the grid.
fn deposit(values: &mut [f64], dt: f64, arrival: f64, seg: &Segment) {
    let n = values.len();
    let cap = n as f64 * dt;
    let s = (arrival + seg.start).max(0.0);
    let e = (arrival + seg.end).min(cap);
    if e <= s {
        return;
    }
    let i0 = (math::floor(s / dt) as usize).min(n - 1);
    let i1 = (math::floor(e / dt) as usize).min(n);
    if i0 == i1 {
        values[i0] += seg.rate * (e - s) / dt;
        return;
    }
    let head = ((i0 + 1) as f64 * dt - s).clamp(0.0, dt);
    values[i0] += seg.rate * head / dt;
    for v in &mut values[i0 + 1..i1] {
        *v += seg.rate;
    }
    if i1 < n {
        let tail = (e - i1 as f64 * dt).clamp(0.0, dt);
        values[i1] += seg.rate * tail / dt;
    }
}

/// Superpose already-built session traces onto a grid. The workhorse behind
/// [`simulate`], exposed for deterministic tests and tooling.
pub fn superpose(
    sessions: &[(f64, SessionTrace)],
    dt: f64,
    horizon: f64,
    warmup: f64,
) -> Result<AggregateSeries> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::field("horizon", "must be finite and > 0"));
    }
    if !warmup.is_finite() || warmup < 0.0 || warmup >= horizon {
        return Err(Error::field("warmup", "must lie in [0, horizon)"));
    }
    let n = grid_bins(horizon, dt)?;
    let mut values = vec![0.0; n];
    for (arrival, trace) in sessions {
        for seg in &trace.segments {
            deposit(&mut values, dt, *arrival, seg);
        }
    }
    Ok(AggregateSeries {
        dt,
        warmup,
        horizon,
        values,
    })
}

/// Run one replication of a workload.
///
/// Arrivals use the master seed's stream 0; session `n` draws its parameters
/// from stream `n + 1`, so edits that change the number of sessions or the
/// strategy never reshuffle other sessions' randomness. Identical inputs
/// give bit-identical output.
pub fn simulate(workload: &WorkloadSpec, sim: &SimConfig) -> Result<(AggregateSeries, SimSummary)> {
    workload.validate()?;
    let n = grid_bins(workload.horizon, sim.dt)?;
    let required = workload.max_session_duration()?;
    if workload.warmup < required && !sim.allow_short_warmup {
        return Err(Error::WarmupTooShort {
            warmup: workload.warmup,
            required,
        });
    }
    let start_bin = math::ceil(workload.warmup / sim.dt - 1e-9) as usize;
    if start_bin >= n {
        return Err(Error::field("warmup", "measurement window is empty"));
    }

    let mut values = vec![0.0_f64; n];
    let arrivals = poisson_arrivals(
        workload.arrival_rate,
        workload.horizon,
        &mut arrival_rng(workload.seed),
    );
    let mut wasted_sum = 0.0_f64;
    let mut interrupted: u64 = 0;

    for (index, &arrival) in arrivals.iter().enumerate() {
        let mut rng = session_rng(workload.seed, index as u64);
        let e = workload.encoding_rate.sample(&mut rng)?;
        let l = workload.duration.sample(&mut rng)?;
        let beta = match &workload.watched_fraction {
            Some(dist) => Some(dist.sample(&mut rng)?),
            None => None,
        };
        let video = VideoParams::new(e, l)?;
        let mut trace = build_trace(&video, &workload.strategy)?;

        if let Some(beta) = beta {
            let tau = beta * l;
            // Bulk transfers hold the entire file by the time anyone stops;
            // paced ones hold the buffer plus steady-rate progress.
            let (buffer_bytes, steady) = match workload.strategy.on_off() {
                Some(p) => (p.buffer.bytes(&video), p.accumulation_ratio * e),
                None => (video.size(), workload.strategy.on_rate()),
            };
            let cap = math::round((buffer_bytes + steady * tau).min(video.size())) as u64;
            if cap < trace.total_bytes() {
                interrupted += 1;
                trace = trace.truncate_at_bytes(cap);
            }
            if arrival >= workload.warmup {
                wasted_sum += model::unused_session_bytes(e, l, buffer_bytes, steady, tau)?;
            }
        }

        for seg in &trace.segments {
            deposit(&mut values, sim.dt, arrival, seg);
        }
    }

    let series = AggregateSeries {
        dt: sim.dt,
        warmup: workload.warmup,
        horizon: workload.horizon,
        values,
    };
    let (mean, second) = series.window_stats();
    let summary = SimSummary {
        seeds: vec![workload.seed],
        session_count: arrivals.len() as u64,
        interrupted_count: interrupted,
        empirical_mean: mean,
        empirical_second_moment: second,
        empirical_variance: (second - mean * mean).max(0.0),
        wasted_mean: if workload.watched_fraction.is_some() {
            wasted_sum / (workload.horizon - workload.warmup)
        } else {
            0.0
        },
    };
    Ok((series, summary))
}

/// Pool replication summaries: averages the per-replication first and second
/// moments (all replications share the same window length), then derives the
/// pooled variance. Seeds and session counts accumulate.
pub fn pool_summaries(parts: &[SimSummary]) -> Result<SimSummary> {
    if parts.is_empty() {
        return Err(Error::EmptyPool);
    }
    let n = parts.len() as f64;
    let mut pooled = SimSummary {
        seeds: Vec::new(),
        session_count: 0,
        interrupted_count: 0,
        empirical_mean: 0.0,
        empirical_second_moment: 0.0,
        empirical_variance: 0.0,
        wasted_mean: 0.0,
    };
    for part in parts {
        pooled.seeds.extend_from_slice(&part.seeds);
        pooled.session_count += part.session_count;
        pooled.interrupted_count += part.interrupted_count;
        pooled.empirical_mean += part.empirical_mean / n;
        pooled.empirical_second_moment += part.empirical_second_moment / n;
        pooled.wasted_mean += part.wasted_mean / n;
    }
    pooled.empirical_variance =
        (pooled.empirical_second_moment - pooled.empirical_mean * pooled.empirical_mean).max(0.0);
    Ok(pooled)
}

/// One workload run `replications` times with seeds `seed, seed+1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicatedRun {
    /// Series of the first replication (per-replication series are rarely
    /// all needed; re-run `simulate` with a specific seed to get another).
    pub first_series: AggregateSeries,
    pub replications: Vec<SimSummary>,
    pub pooled: SimSummary,
}

pub fn replicate(
    workload: &WorkloadSpec,
    sim: &SimConfig,
    replications: u32,
) -> Result<ReplicatedRun> {
    if replications == 0 {
        return Err(Error::field("replications", "must be >= 1"));
    }
    let mut runs = Vec::with_capacity(replications as usize);
    let mut first_series = None;
    for r in 0..replications {
        let mut w = workload.clone();
        w.seed = workload.seed.wrapping_add(r as u64);
        let (series, summary) = simulate(&w, sim)?;
        if first_series.is_none() {
            first_series = Some(series);
        }
        runs.push(summary);
    }
    let pooled = pool_summaries(&runs)?;
    Ok(ReplicatedRun {
        first_series: first_series.expect("at least one replication"),
        replications: runs,
        pooled,
    })
}

/// Pooled statistics of one strategy inside a comparison.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonEntry {
    pub label: String,
    pub strategy: StrategyConfig,
    pub mean: f64,
    pub variance: f64,
    pub session_count: u64,
}

/// Side-by-side comparison of strategies under common randomness.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
    /// Largest pairwise `|a - b| / midpoint(a, b)` across entries.
    pub max_mean_rel_diff: f64,
    pub max_variance_rel_diff: f64,
    pub seeds: Vec<u64>,
}

fn strategy_label(config: &StrategyConfig) -> String {
    match config.on_off() {
        Some(p) => alloc::format!("{}(block={})", config.kind(), p.block_size),
        None => alloc::format!("{}", config.kind()),
    }
}

fn max_pairwise_rel_diff(values: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let mid = 0.5 * (a + b);
            if mid > 0.0 {
                worst = worst.max(math::abs(a - b) / mid);
            }
        }
    }
    worst
}

/// Run the same workload under several strategies with identical arrival and
/// video randomness (same seeds, and session draws do not depend on the
/// strategy). All strategies must share one on_rate, otherwise the traffic
/// envelopes are not comparable and the call is refused.
pub fn compare_strategies(
    base: &WorkloadSpec,
    strategies: &[StrategyConfig],
    sim: &SimConfig,
    replications: u32,
) -> Result<ComparisonReport> {
    if strategies.is_empty() {
        return Err(Error::field("strategies", "need at least one strategy"));
    }
    let on_rate = strategies[0].on_rate();
    if strategies.iter().any(|s| s.on_rate() != on_rate) {
        return Err(Error::MismatchedOnRate);
    }
    let mut entries = Vec::with_capacity(strategies.len());
    for strategy in strategies {
        let mut workload = base.clone();
        workload.strategy = *strategy;
        let run = replicate(&workload, sim, replications)?;
        entries.push(ComparisonEntry {
            label: strategy_label(strategy),
            strategy: *strategy,
            mean: run.pooled.empirical_mean,
            variance: run.pooled.empirical_variance,
            session_count: run.pooled.session_count,
        });
    }
    let means: Vec<f64> = entries.iter().map(|e| e.mean).collect();
    let variances: Vec<f64> = entries.iter().map(|e| e.variance).collect();
    let seeds = (0..replications)
        .map(|r| base.seed.wrapping_add(r as u64))
        .collect();
    Ok(ComparisonReport {
        entries,
        max_mean_rel_diff: max_pairwise_rel_diff(&means),
        max_variance_rel_diff: max_pairwise_rel_diff(&variances),
        seeds,
    })
}
