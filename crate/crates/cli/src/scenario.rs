//! Scenario files: the on-disk mirror of a workload, in TOML.
//!
//! Top-level keys match `WorkloadSpec` field for field; distributions are
//! written as a bare number (constant), `{ lo = a, hi = b }` (uniform), or
//! `[[value, weight], ...]` (weighted atoms). The `[strategy]` table either
//! names a preset (optionally overriding single knobs) or spells a strategy
//! out. Optional `[[compare]]` tables list alternative strategies for the
//! `compare` subcommand; `dt` and `replications` preload the matching flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use streamlab_core::sim::WorkloadSpec;
use streamlab_core::{BufferSpec, DistributionSpec, OnOffParams, StrategyConfig, StrategyKind};

use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistFile {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    Weighted(Vec<(f64, f64)>),
}

impl DistFile {
    pub fn to_spec(&self) -> DistributionSpec {
        match self {
            DistFile::Constant(v) => DistributionSpec::Constant(*v),
            DistFile::Uniform { lo, hi } => DistributionSpec::Uniform { lo: *lo, hi: *hi },
            DistFile::Weighted(atoms) => DistributionSpec::DiscreteWeighted(atoms.clone()),
        }
    }
}

/// A strategy as written in a file or assembled from flags: a preset name,
/// a bare kind, or either of those plus overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategyFile {
    /// Display label for comparison entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// `no-on-off`, `short-on-off`, or `long-on-off`; ignored when a preset
    /// is named.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub on_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_playback: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

fn parse_kind(s: &str) -> Result<StrategyKind> {
    match s {
        "no-on-off" => Ok(StrategyKind::NoOnOff),
        "short-on-off" => Ok(StrategyKind::ShortOnOff),
        "long-on-off" => Ok(StrategyKind::LongOnOff),
        other => bail!(
            "unknown strategy kind '{other}'; expected no-on-off, short-on-off, or long-on-off"
        ),
    }
}

impl StrategyFile {
    pub fn resolve(&self) -> Result<StrategyConfig> {
        if self.buffer_bytes.is_some() && self.buffer_playback.is_some() {
            bail!("strategy: give buffer_bytes or buffer_playback, not both");
        }
        let buffer_override = self
            .buffer_bytes
            .map(BufferSpec::Bytes)
            .or(self.buffer_playback.map(BufferSpec::PlaybackSeconds));

        let base = match (&self.preset, &self.kind) {
            (Some(name), None) => presets::find(name)?.config,
            (None, Some(kind)) => match parse_kind(kind)? {
                StrategyKind::NoOnOff => StrategyConfig::NoOnOff {
                    on_rate: presets::DEFAULT_ON_RATE,
                },
                on_off_kind => {
                    let params = OnOffParams {
                        buffer: buffer_override
                            .context("strategy: buffer_bytes or buffer_playback is required")?,
                        block_size: self
                            .block_size
                            .context("strategy: block_size is required")?,
                        accumulation_ratio: self.k.context("strategy: k is required")?,
                        on_rate: presets::DEFAULT_ON_RATE,
                    };
                    match on_off_kind {
                        StrategyKind::ShortOnOff => StrategyConfig::ShortOnOff(params),
                        _ => StrategyConfig::LongOnOff(params),
                    }
                }
            },
            (Some(_), Some(_)) => bail!("strategy: give a preset or a kind, not both"),
            (None, None) => bail!("strategy: a preset or a kind is required"),
        };

        let config = match base {
            StrategyConfig::NoOnOff { on_rate } => {
                if self.block_size.is_some() || buffer_override.is_some() || self.k.is_some() {
                    bail!("strategy: block_size, buffer, and k do not apply to no-on-off");
                }
                StrategyConfig::NoOnOff {
                    on_rate: self.on_rate.unwrap_or(on_rate),
                }
            }
            StrategyConfig::ShortOnOff(p) | StrategyConfig::LongOnOff(p) => {
                let params = OnOffParams {
                    buffer: buffer_override.unwrap_or(p.buffer),
                    block_size: self.block_size.unwrap_or(p.block_size),
                    accumulation_ratio: self.k.unwrap_or(p.accumulation_ratio),
                    on_rate: self.on_rate.unwrap_or(p.on_rate),
                };
                // Overriding the block size may move the strategy across the
                // short/long boundary; keep the kind consistent with it.
                if params.block_size >= streamlab_core::SHORT_LONG_BLOCK_BOUNDARY {
                    StrategyConfig::LongOnOff(params)
                } else {
                    StrategyConfig::ShortOnOff(params)
                }
            }
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub arrival_rate: f64,
    pub encoding_rate: DistFile,
    pub duration: DistFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watched_fraction: Option<DistFile>,
    pub strategy: StrategyFile,
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    /// Grid step override; the `--dt` flag wins over this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Replication count; the `--replications` flag wins over this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u32>,
    /// Strategies for the `compare` subcommand; empty means the default
    /// trio built from `strategy`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare: Vec<StrategyFile>,
}

impl ScenarioFile {
    pub fn workload(&self) -> Result<WorkloadSpec> {
        let workload = WorkloadSpec {
            arrival_rate: self.arrival_rate,
            encoding_rate: self.encoding_rate.to_spec(),
            duration: self.duration.to_spec(),
            watched_fraction: self.watched_fraction.as_ref().map(DistFile::to_spec),
            strategy: self.strategy.resolve()?,
            horizon: self.horizon,
            warmup: self.warmup,
            seed: self.seed,
        };
        workload.validate()?;
        Ok(workload)
    }
}

pub fn load(path: &Path) -> Result<ScenarioFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid scenario {}", path.display()))
}
