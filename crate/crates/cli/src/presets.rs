//! Built-in strategy presets.
//!
//! The numbers come from 2011 measurements of YouTube and Netflix players.
//! Where the measurements give only a bound or no number at all, the preset
//! carries a declared default and says so in its note, so nobody mistakes a
//! default for a measured value. Block and buffer sizes use binary units
//! (64 kB means 65,536 bytes): socket-buffer granularity makes those the
//! likelier referent.

use anyhow::{anyhow, Result};
use streamlab_core::{BufferSpec, OnOffParams, StrategyConfig};

/// ON (line) rate shared by all presets, bytes per second (20 Mbit/s).
/// The measurements only show the line rate sitting well above the encoding
/// rate; this is a declared default, meant to be overridden.
pub const DEFAULT_ON_RATE: f64 = 2_500_000.0;

#[derive(Debug)]
pub struct Preset {
    pub name: &'static str,
    pub config: StrategyConfig,
    /// What was measured, what is a declared default.
    pub note: &'static str,
}

const fn on_off(buffer: BufferSpec, block_size: u64, k: f64) -> OnOffParams {
    OnOffParams {
        buffer,
        block_size,
        accumulation_ratio: k,
        on_rate: DEFAULT_ON_RATE,
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "youtube-flash",
        config: StrategyConfig::ShortOnOff(on_off(BufferSpec::PlaybackSeconds(40.0), 65_536, 1.25)),
        note: "measured: 64 kB dominant block, ~40 s playback buffered, \
               accumulation ratio ~1.25; ON rate is a declared default",
    },
    Preset {
        name: "youtube-html5-ie",
        config: StrategyConfig::ShortOnOff(on_off(BufferSpec::Bytes(13_107_200), 262_144, 1.05)),
        note: "measured: 256 kB dominant block, 10-15 MB initial download \
               (midpoint used), accumulation ratio 1.04-1.06; ON rate is a \
               declared default",
    },
    Preset {
        name: "youtube-html5-chrome",
        config: StrategyConfig::LongOnOff(on_off(BufferSpec::Bytes(13_107_200), 4_194_304, 1.29)),
        note: "measured: 10-15 MB initial download (midpoint used), \
               accumulation ratio ~1.29; blocks only bounded above 2.5 MB, \
               4 MB block and ON rate are declared defaults",
    },
    Preset {
        name: "youtube-android",
        config: StrategyConfig::LongOnOff(on_off(BufferSpec::Bytes(6_291_456), 4_194_304, 1.15)),
        note: "measured: 4-8 MB initial download (midpoint used), \
               accumulation ratio ~1.15; 4 MB block and ON rate are declared \
               defaults",
    },
    Preset {
        name: "youtube-noonoff",
        config: StrategyConfig::NoOnOff {
            on_rate: DEFAULT_ON_RATE,
        },
        note: "one bulk transfer at the available bandwidth, as seen for HD \
               content and HTML5 on Firefox; ON rate is a declared default",
    },
    Preset {
        name: "netflix-pc",
        config: StrategyConfig::ShortOnOff(on_off(BufferSpec::Bytes(52_428_800), 1_048_576, 1.25)),
        note: "measured: initial downloads in the order of 50 MB; blocks \
               slightly larger than the 64-256 kB range, so 1 MB is a \
               declared default, as are the accumulation ratio and ON rate",
    },
    Preset {
        name: "netflix-ipad",
        config: StrategyConfig::ShortOnOff(on_off(BufferSpec::Bytes(10_485_760), 1_048_576, 1.25)),
        note: "measured: ~10 MB initial download; block size, accumulation \
               ratio, and ON rate are declared defaults",
    },
    Preset {
        name: "netflix-android",
        config: StrategyConfig::LongOnOff(on_off(BufferSpec::Bytes(41_943_040), 4_194_304, 1.25)),
        note: "measured: ~40 MB initial download with large blocks; 4 MB \
               block, accumulation ratio, and ON rate are declared defaults",
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        anyhow!("unknown preset '{name}'; available: {}", names.join(", "))
    })
}
