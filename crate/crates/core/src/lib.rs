//! Flow-level models of video streaming traffic.
//!
//! Streaming services rarely download a video as one continuous transfer.
//! After an initial buffering burst they settle into an ON-OFF pattern:
//! fixed-size blocks fetched at line rate, separated by pauses sized so the
//! long-run download rate stays a little above the playback rate. This crate
//! builds per-session download schedules for those strategies, superposes
//! Poisson session arrivals into aggregate rate series, provides the matching
//! closed-form mean, variance, waste, and interruption-threshold expressions,
//! and recovers strategy structure back out of flow-level records.
//!
//! Everything here is deterministic: the same seed gives the same bytes.
//! The crate is `no_std` (with `alloc`); enable the `std` feature to plug
//! errors into `std::error::Error` consumers, and `serde` for serialization.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod analysis;
pub mod domain;
pub mod error;
mod math;
pub mod model;
pub mod sim;
pub mod trace;

pub use domain::{
    BufferSpec, DistributionSpec, OnOffParams, StrategyConfig, StrategyKind, VideoParams,
    BYTES_PER_MBPS, SHORT_LONG_BLOCK_BOUNDARY,
};
pub use error::{Error, Result};
pub use trace::{build_trace, session_download_duration, steady_rate, Segment, SessionTrace};
