//! streamlab: build, superpose, predict, and classify streaming download
//! schedules from the command line.
//!
//! Eight subcommands: `generate` (one session's schedule), `simulate`
//! (Poisson superposition of sessions), `waste` (interrupted-viewer traffic
//! vs. the closed form), `dimension` (mean/variance/link sizing),
//! `threshold` (shortest video a stopping viewer fails to finish),
//! `analyze` (classify a flow-record CSV), `compare` (strategy invariance),
//! and `presets` (the built-in registry). Everything is seeded and
//! deterministic; artifacts land in `--out-dir` (or `$STREAMLAB_OUT_DIR`).

mod io;
mod presets;
mod report;
mod scenario;

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use streamlab_core::analysis::{self, AnalysisOptions};
use streamlab_core::model;
use streamlab_core::sim::{self, SimConfig};
use streamlab_core::{
    build_trace, steady_rate, BufferSpec, OnOffParams, StrategyConfig, VideoParams,
};

use crate::report::{sig4, strategy_label, Flat};
use crate::scenario::StrategyFile;

#[derive(Parser)]
#[command(
    name = "streamlab",
    version,
    about = "Flow-level lab for video streaming traffic"
)]
struct Cli {
    /// Directory for output artifacts [default: $STREAMLAB_OUT_DIR or .]
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one session's download schedule and export it
    Generate(GenerateArgs),
    /// Superpose Poisson session arrivals into an aggregate rate series
    Simulate(SimulateArgs),
    /// Wasted traffic under viewer interruptions, simulated vs. closed form
    Waste(WasteArgs),
    /// Closed-form mean, variance, and dimensioned link rate
    Dimension(DimensionArgs),
    /// Shortest video length a stopping viewer fails to download fully
    Threshold(ThresholdArgs),
    /// Segment a flow-record CSV into blocks and classify the strategy
    Analyze(AnalyzeArgs),
    /// Run one workload under several strategies with common randomness
    Compare(CompareArgs),
    /// List the built-in strategy presets
    Presets(PresetsArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let out_dir = io::resolve_out_dir(cli.out_dir.as_deref())?;
    match cli.command {
        Command::Generate(args) => generate(&out_dir, &args),
        Command::Simulate(args) => simulate(&out_dir, &args),
        Command::Waste(args) => waste(&out_dir, &args),
        Command::Dimension(args) => dimension(&out_dir, &args),
        Command::Threshold(args) => threshold(&out_dir, &args),
        Command::Analyze(args) => analyze(&out_dir, &args),
        Command::Compare(args) => compare(&out_dir, &args),
        Command::Presets(args) => list_presets(&out_dir, &args),
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Preset name; see `streamlab presets`
    #[arg(long)]
    preset: Option<String>,
    /// Strategy kind when built from scratch: no-on-off, short-on-off, long-on-off
    #[arg(long, conflicts_with = "preset")]
    kind: Option<String>,
    /// Video encoding rate, bytes per second
    #[arg(long, value_name = "BPS")]
    encoding_rate: f64,
    /// Video playback length, seconds
    #[arg(long, value_name = "SECONDS")]
    duration: f64,
    /// ON (line) rate, bytes per second
    #[arg(long, value_name = "BPS")]
    on_rate: Option<f64>,
    /// Block size, bytes
    #[arg(long, value_name = "BYTES")]
    block_size: Option<u64>,
    /// Buffering target, bytes
    #[arg(long, value_name = "BYTES")]
    buffer_bytes: Option<u64>,
    /// Buffering target, seconds of playback
    #[arg(long, value_name = "SECONDS", conflicts_with = "buffer_bytes")]
    buffer_playback: Option<f64>,
    /// Accumulation ratio: steady download rate over encoding rate
    #[arg(long)]
    k: Option<f64>,
    /// Segment CSV artifact (start_s,end_s,rate_Bps)
    #[arg(long, value_name = "FILE", default_value = "trace.csv")]
    trace_out: PathBuf,
    /// Also sample the schedule into flow records (timestamp_s,bytes)
    #[arg(long, value_name = "FILE")]
    flow_out: Option<PathBuf>,
    /// Sampling quantum for --flow-out, seconds
    #[arg(long, value_name = "SECONDS", default_value_t = analysis::DEFAULT_RECORD_QUANTUM)]
    quantum: f64,
    /// Machine-readable report
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GenerateReport {
    strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    encoding_rate: f64,
    video_duration: f64,
    size_bytes: u64,
    on_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    steady_rate: Option<f64>,
    download_duration: f64,
    segment_count: usize,
    trace_out: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow_out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum: Option<f64>,
}

fn generate(out_dir: &Path, args: &GenerateArgs) -> Result<()> {
    let strategy_file = StrategyFile {
        label: None,
        preset: args.preset.clone(),
        kind: args.kind.clone(),
        on_rate: args.on_rate,
        block_size: args.block_size,
        buffer_bytes: args.buffer_bytes,
        buffer_playback: args.buffer_playback,
        k: args.k,
    };
    let config = strategy_file.resolve()?;
    let video = VideoParams::new(args.encoding_rate, args.duration)?;
    config.validate_for(&video)?;
    let trace = build_trace(&video, &config)?;

    let trace_path = io::artifact_path(out_dir, &args.trace_out);
    io::write_segments_csv(&trace_path, &trace.segments)?;
    let mut flow_path = None;
    if let Some(f) = &args.flow_out {
        let records = analysis::records_from_trace(&trace, args.quantum)?;
        let p = io::artifact_path(out_dir, f);
        io::write_flow_csv(&p, &records)?;
        flow_path = Some(p);
    }

    let note = match &args.preset {
        Some(name) => Some(presets::find(name)?.note.to_string()),
        None => None,
    };
    let report = GenerateReport {
        strategy: strategy_label(&config),
        preset: args.preset.clone(),
        note,
        encoding_rate: video.encoding_rate,
        video_duration: video.duration,
        size_bytes: trace.total_bytes(),
        on_rate: config.on_rate(),
        steady_rate: steady_rate(&config, &video).ok(),
        download_duration: trace.download_duration,
        segment_count: trace.segments.len(),
        trace_out: trace_path.display().to_string(),
        flow_out: flow_path.as_ref().map(|p| p.display().to_string()),
        quantum: flow_path.is_some().then_some(args.quantum),
    };
    if let Some(p) = &args.report_out {
        io::write_json(&io::artifact_path(out_dir, p), &report)?;
    }

    let mut flat = Flat::new();
    flat.push("strategy", &report.strategy)
        .push_opt("preset", report.preset.as_ref())
        .push_opt("note", report.note.as_ref())
        .push("encoding_rate_Bps", report.encoding_rate)
        .push("video_duration_s", report.video_duration)
        .push("size_bytes", report.size_bytes)
        .push("on_rate_Bps", report.on_rate)
        .push_opt("steady_rate_Bps", report.steady_rate)
        .push("download_duration_s", report.download_duration)
        .push("segment_count", report.segment_count)
        .push("trace_out", &report.trace_out)
        .push_opt("flow_out", report.flow_out.as_ref())
        .push_opt("quantum_s", report.quantum);
    flat.print();
    Ok(())
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario TOML file
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Replication count (seeds seed, seed+1, ...); wins over the scenario
    #[arg(long)]
    replications: Option<u32>,
    /// Grid step, seconds; wins over the scenario
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Accept a warmup shorter than the longest possible session download
    #[arg(long)]
    allow_short_warmup: bool,
    /// Aggregate rate series of the first replication (t_s,R_Bps)
    #[arg(long, value_name = "FILE", default_value = "series.csv")]
    series_out: PathBuf,
    /// Pooled summary JSON
    #[arg(long, value_name = "FILE", default_value = "summary.json")]
    summary_out: PathBuf,
}

/// Pooled empirical statistics next to the closed-form reference values.
/// The analytic mean and variance assume every video is fully downloaded,
/// so with an interruption model the empirical values sit below them.
#[derive(Serialize)]
struct SimulateReport {
    scenario: String,
    strategy: String,
    seeds: Vec<u64>,
    dt: f64,
    session_count: u64,
    interrupted_count: u64,
    empirical_mean: f64,
    empirical_variance: f64,
    empirical_wasted_rate: f64,
    analytic_mean: f64,
    analytic_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_wasted_rate: Option<f64>,
    series_out: String,
}

fn seeds_text(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn simulate(out_dir: &Path, args: &SimulateArgs) -> Result<()> {
    let file = scenario::load(&args.scenario)?;
    let mut workload = file.workload()?;
    if let Some(seed) = args.seed {
        workload.seed = seed;
    }
    let sim_cfg = SimConfig {
        dt: args.dt.or(file.dt).unwrap_or(sim::DEFAULT_DT),
        allow_short_warmup: args.allow_short_warmup,
    };
    let reps = args.replications.or(file.replications).unwrap_or(1);
    let run = sim::replicate(&workload, &sim_cfg, reps)?;

    let series_path = io::artifact_path(out_dir, &args.series_out);
    io::write_series_csv(&series_path, &run.first_series)?;

    let e_mean = workload.encoding_rate.mean()?;
    let l_mean = workload.duration.mean()?;
    let analytic_mean = model::mean_aggregate_rate(workload.arrival_rate, e_mean, l_mean)?;
    let analytic_variance = model::variance_aggregate_rate(
        workload.arrival_rate,
        e_mean,
        l_mean,
        workload.strategy.on_rate(),
    )?;
    let analytic_wasted_rate = match (&workload.watched_fraction, workload.strategy.on_off()) {
        (Some(beta), Some(p)) => Some(model::mean_wasted_rate(
            workload.arrival_rate,
            &workload.encoding_rate,
            &workload.duration,
            beta,
            &p.buffer,
            p.accumulation_ratio,
        )?),
        _ => None,
    };

    let report = SimulateReport {
        scenario: args.scenario.display().to_string(),
        strategy: strategy_label(&workload.strategy),
        seeds: run.pooled.seeds.clone(),
        dt: sim_cfg.dt,
        session_count: run.pooled.session_count,
        interrupted_count: run.pooled.interrupted_count,
        empirical_mean: run.pooled.empirical_mean,
        empirical_variance: run.pooled.empirical_variance,
        empirical_wasted_rate: run.pooled.wasted_mean,
        analytic_mean,
        analytic_variance,
        analytic_wasted_rate,
        series_out: series_path.display().to_string(),
    };
    let summary_path = io::artifact_path(out_dir, &args.summary_out);
    io::write_json(&summary_path, &report)?;

    let mut flat = Flat::new();
    flat.push("scenario", &report.scenario)
        .push("strategy", &report.strategy)
        .push("seeds", seeds_text(&report.seeds))
        .push("dt_s", report.dt)
        .push("session_count", report.session_count)
        .push("interrupted_count", report.interrupted_count)
        .push("empirical_mean_Bps", report.empirical_mean)
        .push("empirical_variance_Bps2", report.empirical_variance)
        .push("empirical_wasted_rate_Bps", report.empirical_wasted_rate)
        .push("analytic_mean_Bps", report.analytic_mean)
        .push("analytic_variance_Bps2", report.analytic_variance)
        .push_opt("analytic_wasted_rate_Bps", report.analytic_wasted_rate)
        .push("series_out", &report.series_out)
        .push("summary_out", summary_path.display());
    flat.print();
    Ok(())
}

#[derive(Args)]
struct WasteArgs {
    /// Scenario TOML file; must carry watched_fraction and an ON-OFF strategy
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Replication count; wins over the scenario
    #[arg(long)]
    replications: Option<u32>,
    /// Grid step, seconds; wins over the scenario
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Accept a warmup shorter than the longest possible session download
    #[arg(long)]
    allow_short_warmup: bool,
    /// Report JSON
    #[arg(long, value_name = "FILE", default_value = "waste.json")]
    report_out: PathBuf,
}

#[derive(Serialize)]
struct WasteReport {
    scenario: String,
    strategy: String,
    seeds: Vec<u64>,
    session_count: u64,
    interrupted_count: u64,
    empirical_wasted_rate: f64,
    analytic_wasted_rate: f64,
    /// `(empirical - analytic) / analytic`, signed.
    relative_error: f64,
}

fn waste(out_dir: &Path, args: &WasteArgs) -> Result<()> {
    let file = scenario::load(&args.scenario)?;
    let mut workload = file.workload()?;
    if let Some(seed) = args.seed {
        workload.seed = seed;
    }
    let Some(beta) = workload.watched_fraction.clone() else {
        bail!("scenario has no watched_fraction; nothing is ever wasted");
    };
    let Some(params) = workload.strategy.on_off().copied() else {
        bail!(
            "the waste closed form needs an ON-OFF strategy; \
             use `simulate` to measure waste under no-on-off"
        );
    };
    let sim_cfg = SimConfig {
        dt: args.dt.or(file.dt).unwrap_or(sim::DEFAULT_DT),
        allow_short_warmup: args.allow_short_warmup,
    };
    let reps = args.replications.or(file.replications).unwrap_or(1);
    let run = sim::replicate(&workload, &sim_cfg, reps)?;

    let analytic = model::mean_wasted_rate(
        workload.arrival_rate,
        &workload.encoding_rate,
        &workload.duration,
        &beta,
        &params.buffer,
        params.accumulation_ratio,
    )?;
    let empirical = run.pooled.wasted_mean;
    let report = WasteReport {
        scenario: args.scenario.display().to_string(),
        strategy: strategy_label(&workload.strategy),
        seeds: run.pooled.seeds.clone(),
        session_count: run.pooled.session_count,
        interrupted_count: run.pooled.interrupted_count,
        empirical_wasted_rate: empirical,
        analytic_wasted_rate: analytic,
        relative_error: if analytic > 0.0 {
            (empirical - analytic) / analytic
        } else {
            0.0
        },
    };
    io::write_json(&io::artifact_path(out_dir, &args.report_out), &report)?;

    let mut flat = Flat::new();
    flat.push("scenario", &report.scenario)
        .push("strategy", &report.strategy)
        .push("seeds", seeds_text(&report.seeds))
        .push("session_count", report.session_count)
        .push("interrupted_count", report.interrupted_count)
        .push("empirical_wasted_rate_Bps", report.empirical_wasted_rate)
        .push("analytic_wasted_rate_Bps", report.analytic_wasted_rate)
        .push("relative_error", report.relative_error);
    flat.print();
    Ok(())
}

#[derive(Args)]
struct DimensionArgs {
    /// Session arrival rate, sessions per second
    #[arg(long)]
    lambda: f64,
    /// Mean encoding rate, bytes per second
    #[arg(long, value_name = "BPS")]
    e: f64,
    /// Mean video length, seconds
    #[arg(long, value_name = "SECONDS")]
    l: f64,
    /// Mean ON (line) rate, bytes per second
    #[arg(long, value_name = "BPS")]
    g: f64,
    /// Headroom in standard deviations (at least 1)
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Report JSON
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DimensionReport {
    arrival_rate: f64,
    mean_encoding_rate: f64,
    mean_duration: f64,
    mean_on_rate: f64,
    alpha: f64,
    mean: f64,
    variance: f64,
    std_dev: f64,
    link_rate: f64,
}

fn dimension(out_dir: &Path, args: &DimensionArgs) -> Result<()> {
    let mean = model::mean_aggregate_rate(args.lambda, args.e, args.l)?;
    let variance = model::variance_aggregate_rate(args.lambda, args.e, args.l, args.g)?;
    let link_rate = model::dimension_link(args.lambda, args.e, args.l, args.g, args.alpha)?;
    let report = DimensionReport {
        arrival_rate: args.lambda,
        mean_encoding_rate: args.e,
        mean_duration: args.l,
        mean_on_rate: args.g,
        alpha: args.alpha,
        mean,
        variance,
        std_dev: variance.sqrt(),
        link_rate,
    };
    if let Some(p) = &args.report_out {
        io::write_json(&io::artifact_path(out_dir, p), &report)?;
    }
    let mut flat = Flat::new();
    flat.push("arrival_rate", report.arrival_rate)
        .push("mean_encoding_rate_Bps", report.mean_encoding_rate)
        .push("mean_duration_s", report.mean_duration)
        .push("mean_on_rate_Bps", report.mean_on_rate)
        .push("alpha", report.alpha)
        .push("mean_Bps", report.mean)
        .push("variance_Bps2", report.variance)
        .push("std_dev_Bps", report.std_dev)
        .push("link_rate_Bps", report.link_rate);
    flat.print();
    Ok(())
}

#[derive(Args)]
struct ThresholdArgs {
    /// Buffer size in seconds of playback
    #[arg(long)]
    bprime: f64,
    /// Accumulation ratio: steady download rate over encoding rate
    #[arg(long)]
    k: f64,
    /// Fraction of the video watched before stopping
    #[arg(long)]
    beta: f64,
    /// Report JSON
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ThresholdReport {
    buffer_playback: f64,
    accumulation_ratio: f64,
    watched_fraction: f64,
    /// `None` when pacing outruns every viewer (k * beta >= 1): no finite
    /// video length gets interrupted.
    threshold: Option<f64>,
}

fn threshold(out_dir: &Path, args: &ThresholdArgs) -> Result<()> {
    let value = model::full_download_length_threshold(args.bprime, args.k, args.beta)?;
    let report = ThresholdReport {
        buffer_playback: args.bprime,
        accumulation_ratio: args.k,
        watched_fraction: args.beta,
        threshold: value.is_finite().then_some(value),
    };
    if let Some(p) = &args.report_out {
        io::write_json(&io::artifact_path(out_dir, p), &report)?;
    }
    let mut flat = Flat::new();
    flat.push("buffer_playback_s", args.bprime)
        .push("accumulation_ratio", args.k)
        .push("watched_fraction", args.beta)
        .push("threshold_s", sig4(value));
    if !value.is_finite() {
        flat.push(
            "note",
            "pacing stays ahead of every viewer; videos of any length download fully",
        );
    }
    flat.print();
    Ok(())
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Flow-record CSV (header timestamp_s,bytes)
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with = "segments",
        required_unless_present = "segments"
    )]
    input: Option<PathBuf>,
    /// Segment CSV (header start_s,end_s,rate_Bps) to sample into flow
    /// records before analysis
    #[arg(long, value_name = "FILE")]
    segments: Option<PathBuf>,
    /// Sampling quantum when converting segments, seconds
    #[arg(long, value_name = "SECONDS", default_value_t = analysis::DEFAULT_RECORD_QUANTUM)]
    quantum: f64,
    /// Write the converted flow records (requires --segments)
    #[arg(long, value_name = "FILE", requires = "segments")]
    flow_out: Option<PathBuf>,
    /// Idle gap that closes a transfer block, seconds
    #[arg(long, value_name = "SECONDS", default_value_t = analysis::DEFAULT_IDLE_GAP)]
    gap: f64,
    /// Known encoding rate, bytes per second
    #[arg(long, value_name = "BPS")]
    encoding_rate: Option<f64>,
    /// Known playback length, seconds; enables the encoding-rate estimate
    #[arg(long, value_name = "SECONDS")]
    video_duration: Option<f64>,
    /// Full report JSON including per-block detail
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,
}

fn analyze(out_dir: &Path, args: &AnalyzeArgs) -> Result<()> {
    let (records, input_name) = match (&args.input, &args.segments) {
        (Some(p), None) => (io::read_flow_csv(p)?, p),
        (None, Some(p)) => {
            let segments = io::read_segments_csv(p)?;
            let records = analysis::records_from_segments(&segments, args.quantum)?;
            if let Some(f) = &args.flow_out {
                io::write_flow_csv(&io::artifact_path(out_dir, f), &records)?;
            }
            (records, p)
        }
        _ => unreachable!("clap enforces exactly one input"),
    };
    let report = analysis::analyze(
        &records,
        &AnalysisOptions {
            idle_gap: args.gap,
            encoding_rate: args.encoding_rate,
            video_duration: args.video_duration,
        },
    )?;
    if let Some(p) = &args.report_out {
        io::write_json(&io::artifact_path(out_dir, p), &report)?;
    }

    let mut flat = Flat::new();
    flat.push("input", input_name.display())
        .push("record_count", records.len())
        .push("idle_gap_s", args.gap)
        .push("classification", report.classification)
        .push("total_bytes", report.total_bytes)
        .push("trace_end_s", report.trace_end)
        .push("buffering_end_s", report.buffering_end)
        .push("buffering_bytes", report.buffering_bytes)
        .push("block_count", report.block_count)
        .push("off_count", report.off_count)
        .push_opt(
            "median_steady_block_bytes",
            report.median_steady_block_bytes,
        )
        .push_opt("accumulation_ratio", report.accumulation_ratio.map(sig4))
        .push_opt(
            "estimated_encoding_rate_Bps",
            report.estimated_encoding_rate,
        )
        .push_opt(
            "block_size_dispersion",
            report.block_size_dispersion.map(sig4),
        )
        .push("mixed_regime", report.mixed_regime)
        .push("off_durations_near_gap", report.off_durations_near_gap);
    flat.print();
    Ok(())
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario TOML; its [[compare]] blocks define the entries, otherwise
    /// a no-on-off / 64 kB short / 4 MB long trio is built from [strategy]
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Replication count; wins over the scenario
    #[arg(long)]
    replications: Option<u32>,
    /// Grid step, seconds; wins over the scenario
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Accept a warmup shorter than the longest possible session download
    #[arg(long)]
    allow_short_warmup: bool,
    /// Report JSON
    #[arg(long, value_name = "FILE", default_value = "compare.json")]
    report_out: PathBuf,
}

/// The standard strategy trio: bulk, 64 kB short blocks, 4 MB long blocks,
/// sharing the base strategy's line rate and (when present) its buffer and
/// accumulation ratio.
fn default_trio(base: &StrategyConfig) -> Vec<StrategyConfig> {
    let on_rate = base.on_rate();
    let (buffer, k) = match base.on_off() {
        Some(p) => (p.buffer, p.accumulation_ratio),
        None => (BufferSpec::PlaybackSeconds(40.0), 1.25),
    };
    vec![
        StrategyConfig::NoOnOff { on_rate },
        StrategyConfig::ShortOnOff(OnOffParams {
            buffer,
            block_size: 65_536,
            accumulation_ratio: k,
            on_rate,
        }),
        StrategyConfig::LongOnOff(OnOffParams {
            buffer,
            block_size: 4_194_304,
            accumulation_ratio: k,
            on_rate,
        }),
    ]
}

fn compare(out_dir: &Path, args: &CompareArgs) -> Result<()> {
    let file = scenario::load(&args.scenario)?;
    let mut base = file.workload()?;
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    let sim_cfg = SimConfig {
        dt: args.dt.or(file.dt).unwrap_or(sim::DEFAULT_DT),
        allow_short_warmup: args.allow_short_warmup,
    };
    let reps = args.replications.or(file.replications).unwrap_or(1);

    let (labels, strategies): (Vec<Option<String>>, Vec<StrategyConfig>) =
        if file.compare.is_empty() {
            let trio = default_trio(&base.strategy);
            (vec![None; trio.len()], trio)
        } else {
            let mut labels = Vec::new();
            let mut strategies = Vec::new();
            for entry in &file.compare {
                labels.push(entry.label.clone());
                strategies.push(entry.resolve()?);
            }
            (labels, strategies)
        };

    let mut report = sim::compare_strategies(&base, &strategies, &sim_cfg, reps)?;
    for (entry, label) in report.entries.iter_mut().zip(labels) {
        if let Some(label) = label {
            entry.label = label;
        }
    }
    let report_path = io::artifact_path(out_dir, &args.report_out);
    io::write_json(&report_path, &report)?;

    let mut flat = Flat::new();
    flat.push("scenario", args.scenario.display())
        .push("seeds", seeds_text(&report.seeds))
        .push("dt_s", sim_cfg.dt);
    for (i, entry) in report.entries.iter().enumerate() {
        flat.push(format!("strategy.{i}.label",), &entry.label)
            .push(format!("strategy.{i}.mean_Bps"), entry.mean)
            .push(format!("strategy.{i}.variance_Bps2"), entry.variance)
            .push(format!("strategy.{i}.session_count"), entry.session_count);
    }
    flat.push("max_mean_rel_diff", sig4(report.max_mean_rel_diff))
        .push("max_variance_rel_diff", sig4(report.max_variance_rel_diff))
        .push("report_out", report_path.display());
    flat.print();
    Ok(())
}

#[derive(Args)]
struct PresetsArgs {
    /// Show one preset instead of the whole registry
    #[arg(long)]
    name: Option<String>,
    /// Registry as JSON
    #[arg(long, value_name = "FILE")]
    report_out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PresetReport {
    name: String,
    strategy: String,
    on_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    block_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    buffer_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    buffer_playback: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accumulation_ratio: Option<f64>,
    note: String,
}

fn preset_report(preset: &presets::Preset) -> PresetReport {
    let p = preset.config.on_off();
    let (buffer_bytes, buffer_playback) = match p.map(|p| p.buffer) {
        Some(BufferSpec::Bytes(b)) => (Some(b), None),
        Some(BufferSpec::PlaybackSeconds(s)) => (None, Some(s)),
        None => (None, None),
    };
    PresetReport {
        name: preset.name.to_string(),
        strategy: strategy_label(&preset.config),
        on_rate: preset.config.on_rate(),
        block_size: p.map(|p| p.block_size),
        buffer_bytes,
        buffer_playback,
        accumulation_ratio: p.map(|p| p.accumulation_ratio),
        note: preset.note.to_string(),
    }
}

fn list_presets(out_dir: &Path, args: &PresetsArgs) -> Result<()> {
    let selected: Vec<&presets::Preset> = match &args.name {
        Some(name) => vec![presets::find(name)?],
        None => presets::PRESETS.iter().collect(),
    };
    let reports: Vec<PresetReport> = selected.iter().map(|p| preset_report(p)).collect();
    if let Some(p) = &args.report_out {
        io::write_json(&io::artifact_path(out_dir, p), &reports)?;
    }
    let blocks: Vec<String> = reports
        .iter()
        .map(|r| {
            let mut flat = Flat::new();
            flat.push("name", &r.name)
                .push("strategy", &r.strategy)
                .push("on_rate_Bps", r.on_rate)
                .push_opt("block_size_bytes", r.block_size)
                .push_opt("buffer_bytes", r.buffer_bytes)
                .push_opt("buffer_playback_s", r.buffer_playback)
                .push_opt("accumulation_ratio", r.accumulation_ratio)
                .push("note", &r.note);
            flat.render()
        })
        .collect();
    report::print_text(&blocks.join("\n"));
    Ok(())
}
