//! The per-slot event loop: channels, PHY and both agents bound into episodes.

mod config;
mod trace;
mod world;

pub use config::{
    parse_pairs, ChannelConfig, ChannelModel, GeometryModel, HotbootConfig, RunConfig, ScenarioConfig, UavConfig,
    UavKind,
};
pub use trace::{SlotRecord, Trace, TRACE_HEADER};
pub use world::{build_uav_agent, World};

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::agents::HotbootArtifact;
use crate::error::{Error, Result};

/// Runs one episode of `config.run.slots` slots.
pub fn run_episode(config: &ScenarioConfig, hotboot: Option<&HotbootArtifact>) -> Result<Trace> {
    World::new(config, hotboot)?.run(config.run.slots)
}

/// Worker count for batch runs: `AEGIS_THREADS` if set and positive, else
/// the number of available cores.
pub fn batch_threads() -> usize {
    std::env::var("AEGIS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs `config` once per seed. Traces come back in `seeds` order whatever
/// the number of worker threads.
pub fn run_batch(
    config: &ScenarioConfig,
    seeds: &[u64],
    hotboot: Option<&HotbootArtifact>,
    threads: usize,
) -> Result<Vec<Trace>> {
    let distinct: BTreeSet<u64> = seeds.iter().copied().collect();
    if distinct.len() != seeds.len() {
        return Err(Error::Config("batch seeds must be distinct".into()));
    }
    config.validate()?;
    let one = |seed: u64| {
        let mut cfg = config.clone();
        cfg.run.seed = seed;
        run_episode(&cfg, hotboot)
    };
    if threads <= 1 || seeds.len() <= 1 {
        return seeds.iter().map(|&s| one(s)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| seeds.par_iter().map(|&s| one(s)).collect())
}
