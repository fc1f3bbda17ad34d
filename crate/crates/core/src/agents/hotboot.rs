//! Pretraining in perturbed copies of a scenario, and the on-disk store of
//! the resulting weights and tables.

use std::path::{Path, PathBuf};

use crate::channel::Point2;
use crate::error::{Error, Result};
use crate::game::{build_uav_agent, ChannelModel, ScenarioConfig, UavKind, World};
use crate::nn::{load_weights, save_weights, CnnWeights};
use crate::numerics::RandomStream;
use crate::tabular::{load_table, save_table, TabularArtifact};

/// Maximum jitter of link means, dB.
pub const MEAN_JITTER_DB: f64 = 3.0;
/// Maximum relative jitter of node coordinates.
pub const POSITION_JITTER: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum HotbootArtifact {
    Weights(CnnWeights),
    Table(TabularArtifact),
}

impl HotbootArtifact {
    pub fn digest(&self) -> u64 {
        match self {
            HotbootArtifact::Weights(w) => w.digest(),
            HotbootArtifact::Table(t) => t.digest(),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            HotbootArtifact::Weights(_) => "uavq",
            HotbootArtifact::Table(_) => "uavt",
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            HotbootArtifact::Weights(w) => save_weights(w, path),
            HotbootArtifact::Table(t) => save_table(t, path),
        }
    }

    /// Loads by file extension.
    pub fn load(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("uavq") => Ok(HotbootArtifact::Weights(load_weights(path)?)),
            Some("uavt") => Ok(HotbootArtifact::Table(load_table(path)?)),
            _ => Err(Error::Format(format!("{} is not a .uavq or .uavt file", path.display()))),
        }
    }
}

/// Store file for the configured agent: `<agent>-<scenario hash>.<ext>`.
pub fn store_path(dir: &Path, cfg: &ScenarioConfig) -> Option<PathBuf> {
    let ext = match cfg.uav.kind {
        UavKind::Drlur => "uavq",
        UavKind::Hpur | UavKind::QLearn => "uavt",
        UavKind::Fixed => return None,
    };
    Some(dir.join(format!("{}-{:016x}.{ext}", cfg.uav.kind.name(), cfg.scenario_hash())))
}

fn jitter_point(p: Point2, stream: &mut RandomStream) -> Point2 {
    Point2::new(
        p.x * (1.0 + stream.uniform_range(-POSITION_JITTER, POSITION_JITTER)),
        p.y * (1.0 + stream.uniform_range(-POSITION_JITTER, POSITION_JITTER)),
    )
}

/// A "similar" scenario: link means shifted by up to 3 dB and node
/// coordinates scaled by up to 10%. Geometry draws that break the scenario's
/// preconditions are redrawn.
pub fn perturb_scenario(cfg: &ScenarioConfig, stream: &mut RandomStream) -> ScenarioConfig {
    let mut out = cfg.clone();
    let shift = |stream: &mut RandomStream| stream.uniform_range(-MEAN_JITTER_DB, MEAN_JITTER_DB);
    match &mut out.channel.model {
        ChannelModel::Abstract(links) => {
            for l in links.iter_mut() {
                l.mean_db += shift(stream);
            }
        }
        ChannelModel::Geometry(g) => {
            g.ground.mean_db_at_ref += shift(stream);
            g.air.mean_db_at_ref += shift(stream);
            let base = g.geometry.clone();
            for _ in 0..100 {
                let mut geo = base.clone();
                geo.user = jitter_point(geo.user, stream);
                geo.bs0 = jitter_point(geo.bs0, stream);
                geo.bs1 = jitter_point(geo.bs1, stream);
                geo.jammer = jitter_point(geo.jammer, stream);
                let uav = jitter_point(Point2::new(geo.uav.x, geo.uav.y), stream);
                geo.uav.x = uav.x;
                geo.uav.y = uav.y;
                geo.uav.z *= 1.0 + stream.uniform_range(-POSITION_JITTER, POSITION_JITTER);
                if geo.validate().is_ok() {
                    g.geometry = geo;
                    break;
                }
            }
        }
    }
    out
}

/// Trains one fresh agent sequentially through `scenarios` perturbed
/// episodes of `slots` slots each and returns what it learned. Returns
/// `None`, with a warning, when there is nothing to train.
pub fn hotboot(
    cfg: &ScenarioConfig,
    scenarios: usize,
    slots: usize,
    stream: &mut RandomStream,
) -> Result<Option<HotbootArtifact>> {
    if cfg.uav.kind == UavKind::Fixed {
        return Err(Error::Config("a fixed-power UAV has nothing to pretrain".into()));
    }
    if scenarios == 0 || slots == 0 {
        log::warn!("hotboot with {scenarios} scenarios of {slots} slots: falling back to fresh initialization");
        return Ok(None);
    }
    cfg.validate()?;
    let mut init = stream.split("hotboot-init");
    let mut agent = build_uav_agent(cfg, None, &mut init)?;
    let mut jitter = stream.split("hotboot-jitter");
    let mut seeds = stream.split("hotboot-seeds");
    for g in 0..scenarios {
        let mut scenario = perturb_scenario(cfg, &mut jitter);
        scenario.run.seed = seeds.next_u64();
        scenario.run.slots = slots;
        let mut world = World::with_agent(&scenario, agent)?;
        let trace = world.run(slots)?;
        log::info!(
            "hotboot scenario {}/{scenarios}: mean utility {:.6}",
            g + 1,
            trace.records.iter().map(|r| r.u_uav).sum::<f64>() / slots as f64
        );
        agent = world.into_agent();
    }
    Ok(agent.artifact())
}
