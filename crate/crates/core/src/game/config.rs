//! Scenario configuration and its line-based text form.
//!
//! A scenario file holds `section.key = value` lines; `#` starts a comment.
//! Every key is optional and falls back to the default listed by
//! [`ScenarioConfig::to_text`] on `ScenarioConfig::default()`.

use std::collections::BTreeMap;

use crate::agents::{ActionGrid, DrlurConfig, EpsilonSchedule, JammerConfig, JammerKind, TabularUavConfig};
use crate::channel::{AbstractLink, FeatureScale, Geometry, LinkParams, ObservationCase, Point2, Point3};
use crate::error::{Error, Result};
use crate::numerics::{db_to_linear, fnv1a64};
use crate::phy::RadioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UavKind {
    Drlur,
    Hpur,
    QLearn,
    /// Always plays `uav.fixed_mw`.
    Fixed,
}

impl UavKind {
    pub fn name(self) -> &'static str {
        match self {
            UavKind::Drlur => "drlur",
            UavKind::Hpur => "hpur",
            UavKind::QLearn => "qlearn",
            UavKind::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "drlur" => Ok(UavKind::Drlur),
            "hpur" => Ok(UavKind::Hpur),
            "qlearn" => Ok(UavKind::QLearn),
            "fixed" => Ok(UavKind::Fixed),
            _ => Err(Error::Config(format!("unknown uav agent '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryModel {
    pub geometry: Geometry,
    pub ground: LinkParams,
    pub air: LinkParams,
    /// User speed range in m/s.
    pub speed_min: f64,
    pub speed_max: f64,
}

impl GeometryModel {
    pub fn link_params(&self) -> [LinkParams; 5] {
        crate::channel::Link::ALL.map(|l| if l.is_air() { self.air } else { self.ground })
    }

    /// The cell the user roams in: a disc around its start position.
    pub fn cell_center(&self) -> Point2 {
        self.geometry.user
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelModel {
    Abstract([AbstractLink; 5]),
    Geometry(GeometryModel),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    pub case: ObservationCase,
    /// Standard deviation of the normalized-feature error in the noisy case.
    pub noise_sigma: f64,
    /// Extra dB above median + 3 sigma used as the gain normalization ceiling.
    pub headroom_db: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HotbootConfig {
    pub scenarios: usize,
    pub slots: usize,
    pub seed: u64,
    /// Exploration schedule used after loading pretrained weights or tables.
    pub epsilon: EpsilonSchedule,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UavConfig {
    pub kind: UavKind,
    pub step_mw: f64,
    pub fixed_mw: f64,
    pub drlur: DrlurConfig,
    pub tabular: TabularUavConfig,
    pub hotboot: HotbootConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub slots: usize,
    pub seed: u64,
    /// Moving-average window for summaries.
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub radio: RadioConfig,
    pub channel: ChannelConfig,
    pub uav: UavConfig,
    pub jammer: JammerConfig,
    pub run: RunConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let radio = RadioConfig::default();
        Self {
            channel: ChannelConfig {
                model: ChannelModel::Abstract([AbstractLink { mean_db: -60.0, sigma_db: 0.0 }; 5]),
                case: ObservationCase::Ideal,
                noise_sigma: 1.5,
                headroom_db: 0.0,
            },
            uav: UavConfig {
                kind: UavKind::Drlur,
                step_mw: 5.0,
                fixed_mw: 0.0,
                drlur: DrlurConfig::default(),
                tabular: TabularUavConfig::default(),
                hotboot: HotbootConfig {
                    scenarios: 10,
                    slots: 500,
                    seed: 7,
                    epsilon: EpsilonSchedule { start: 0.1, end: 0.01, decay_slots: 200 },
                },
            },
            jammer: JammerConfig::default(),
            run: RunConfig { slots: 2000, seed: 1, window: 50 },
            radio,
        }
    }
}

fn default_geometry() -> GeometryModel {
    GeometryModel {
        geometry: Geometry {
            user: Point2::new(0.0, 0.0),
            bs0: Point2::new(200.0, 0.0),
            bs1: Point2::new(600.0, 0.0),
            jammer: Point2::new(150.0, 100.0),
            uav: Point3 { x: 300.0, y: 0.0, z: 100.0 },
            cell_radius: 50.0,
        },
        ground: LinkParams::GROUND,
        air: LinkParams::AIR,
        speed_min: 0.5,
        speed_max: 1.5,
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn int(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

fn uint64(key: &str, v: &str) -> Result<u64> {
    v.parse().map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

/// Splits scenario text into its key/value pairs. Duplicate keys and lines
/// without `=` are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'section.key = value'", n + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", n + 1)));
        }
        if out.insert(k.clone(), v).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k}", n + 1)));
        }
    }
    Ok(out)
}

const LINKS: [&str; 5] = ["h1", "h2", "h3", "h4", "h5"];

impl ScenarioConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let mut cfg = ScenarioConfig::default();
        if let Some(mode) = pairs.get("channel.mode") {
            cfg.channel.model = match mode.as_str() {
                "abstract" => cfg.channel.model,
                "geometry" => ChannelModel::Geometry(default_geometry()),
                other => return Err(Error::Config(format!("channel.mode: unknown mode '{other}'"))),
            };
        }
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        let jam_step = match pairs.get("jammer.step_mw") {
            Some(v) => num("jammer.step_mw", v)?,
            None => 5.0,
        };
        cfg.jammer.grid = ActionGrid::uniform(cfg.radio.max_jam_power, jam_step)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let r = &mut self.radio;
        let u = &mut self.uav;
        let j = &mut self.jammer;
        match key {
            "channel.mode" => {}
            "radio.user_mw" => r.user_power = num(key, v)?,
            "radio.user_limit_mw" => r.user_power_limit = num(key, v)?,
            "radio.noise_mw" => r.noise_power = num(key, v)?,
            "radio.relay_cost" => r.relay_cost = num(key, v)?,
            "radio.jam_cost" => r.jam_cost = num(key, v)?,
            "radio.uav_max_mw" => r.max_uav_power = num(key, v)?,
            "radio.jam_max_mw" => r.max_jam_power = num(key, v)?,
            "radio.slot_s" => r.slot_duration = num(key, v)?,
            "channel.case" => {
                self.channel.case = match v {
                    "1" => ObservationCase::Ideal,
                    "2" => ObservationCase::NoisyDelayed,
                    _ => return Err(Error::Config(format!("channel.case must be 1 or 2, got '{v}'"))),
                }
            }
            "channel.noise_sigma" => self.channel.noise_sigma = num(key, v)?,
            "channel.headroom_db" => self.channel.headroom_db = num(key, v)?,
            "uav.agent" => u.kind = UavKind::parse(v)?,
            "uav.step_mw" => u.step_mw = num(key, v)?,
            "uav.fixed_mw" => u.fixed_mw = num(key, v)?,
            "uav.history" => u.drlur.history = int(key, v)?,
            "uav.learning_rate" => u.drlur.train.learning_rate = num(key, v)?,
            "uav.batch" => u.drlur.train.batch_size = int(key, v)?,
            "uav.gamma" => u.drlur.train.gamma = num(key, v)?,
            "uav.eps_start" => u.drlur.epsilon.start = num(key, v)?,
            "uav.eps_end" => u.drlur.epsilon.end = num(key, v)?,
            "uav.eps_decay_slots" => u.drlur.epsilon.decay_slots = int(key, v)?,
            "uav.replay_capacity" => u.drlur.replay_capacity = int(key, v)?,
            "uav.target_period" => u.drlur.target_period = int(key, v)?,
            "uav.fc1_units" => u.drlur.arch.r1 = int(key, v)?,
            "uav.tab_alpha" => u.tabular.alpha = num(key, v)?,
            "uav.tab_gamma" => u.tabular.gamma = num(key, v)?,
            "uav.tab_delta" => u.tabular.delta = num(key, v)?,
            "uav.tab_rho_bins" => u.tabular.rho_bins = int(key, v)?,
            "uav.tab_eps_start" => u.tabular.epsilon.start = num(key, v)?,
            "uav.tab_eps_end" => u.tabular.epsilon.end = num(key, v)?,
            "uav.tab_eps_decay_slots" => u.tabular.epsilon.decay_slots = int(key, v)?,
            "uav.hotboot_scenarios" => u.hotboot.scenarios = int(key, v)?,
            "uav.hotboot_slots" => u.hotboot.slots = int(key, v)?,
            "uav.hotboot_seed" => u.hotboot.seed = uint64(key, v)?,
            "uav.hotboot_eps_start" => u.hotboot.epsilon.start = num(key, v)?,
            "uav.hotboot_eps_end" => u.hotboot.epsilon.end = num(key, v)?,
            "uav.hotboot_eps_decay_slots" => u.hotboot.epsilon.decay_slots = int(key, v)?,
            "jammer.kind" => {
                j.kind = JammerKind::parse(v).ok_or_else(|| Error::Config(format!("unknown jammer kind '{v}'")))?
            }
            "jammer.level_mw" => j.level = num(key, v)?,
            "jammer.step_mw" => {}
            "jammer.alpha" => j.alpha = num(key, v)?,
            "jammer.gamma" => j.gamma = num(key, v)?,
            "jammer.eps_start" => j.epsilon.start = num(key, v)?,
            "jammer.eps_end" => j.epsilon.end = num(key, v)?,
            "jammer.eps_decay_slots" => j.epsilon.decay_slots = int(key, v)?,
            "jammer.rho_bins" => j.rho_bins = int(key, v)?,
            "run.slots" => self.run.slots = int(key, v)?,
            "run.seed" => self.run.seed = uint64(key, v)?,
            "run.window" => self.run.window = int(key, v)?,
            _ => return self.set_channel(key, v),
        }
        Ok(())
    }
}

impl ScenarioConfig {
    fn set_channel(&mut self, key: &str, v: &str) -> Result<()> {
        let unknown = || Error::Config(format!("unknown key '{key}'"));
        let rest = key.strip_prefix("channel.").ok_or_else(unknown)?;
        match &mut self.channel.model {
            ChannelModel::Abstract(links) => {
                let (link, field) = rest.split_once('_').ok_or_else(unknown)?;
                let i = LINKS.iter().position(|l| *l == link).ok_or_else(unknown)?;
                match field {
                    "mean_db" => links[i].mean_db = num(key, v)?,
                    "sigma_db" => links[i].sigma_db = num(key, v)?,
                    _ => return Err(unknown()),
                }
            }
            ChannelModel::Geometry(g) => {
                let geo = &mut g.geometry;
                let slot: &mut f64 = match rest {
                    "user_x" => &mut geo.user.x,
                    "user_y" => &mut geo.user.y,
                    "bs0_x" => &mut geo.bs0.x,
                    "bs0_y" => &mut geo.bs0.y,
                    "bs1_x" => &mut geo.bs1.x,
                    "bs1_y" => &mut geo.bs1.y,
                    "jammer_x" => &mut geo.jammer.x,
                    "jammer_y" => &mut geo.jammer.y,
                    "uav_x" => &mut geo.uav.x,
                    "uav_y" => &mut geo.uav.y,
                    "uav_z" => &mut geo.uav.z,
                    "cell_radius" => &mut geo.cell_radius,
                    "speed_min" => &mut g.speed_min,
                    "speed_max" => &mut g.speed_max,
                    "ground_ref_db" => &mut g.ground.mean_db_at_ref,
                    "ground_exp" => &mut g.ground.pathloss_exp,
                    "ground_sigma_db" => &mut g.ground.shadow_sigma_db,
                    "air_ref_db" => &mut g.air.mean_db_at_ref,
                    "air_exp" => &mut g.air.pathloss_exp,
                    "air_sigma_db" => &mut g.air.shadow_sigma_db,
                    _ => return Err(unknown()),
                };
                *slot = num(key, v)?;
            }
        }
        Ok(())
    }

    pub fn uav_grid(&self) -> Result<ActionGrid> {
        ActionGrid::uniform(self.radio.max_uav_power, self.uav.step_mw)
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        let grid = self.uav_grid()?;
        if (self.jammer.grid.max() - self.radio.max_jam_power).abs() > 1e-9 {
            return Err(Error::Config("jammer grid does not end at radio.jam_max_mw".into()));
        }
        self.jammer.validate()?;
        match &self.channel.model {
            ChannelModel::Abstract(links) => {
                for (name, l) in LINKS.iter().zip(links) {
                    if !(0.0..=12.0).contains(&l.sigma_db) {
                        return Err(Error::Config(format!("channel.{name}_sigma_db outside [0, 12]")));
                    }
                }
            }
            ChannelModel::Geometry(g) => {
                g.geometry.validate()?;
                g.ground.validate()?;
                g.air.validate()?;
                if !(g.speed_min >= 0.0 && g.speed_max >= g.speed_min) {
                    return Err(Error::Config("channel speed range must satisfy 0 <= min <= max".into()));
                }
            }
        }
        if !(self.channel.noise_sigma >= 0.0) {
            return Err(Error::Config("channel.noise_sigma must be >= 0".into()));
        }
        if self.run.window == 0 {
            return Err(Error::Config("run.window must be positive".into()));
        }
        match self.uav.kind {
            UavKind::Drlur => self.uav.drlur.validate(&grid)?,
            UavKind::Hpur | UavKind::QLearn => self.uav.tabular.validate()?,
            UavKind::Fixed => {
                if grid.index_of(self.uav.fixed_mw).is_none() {
                    return Err(Error::Config(format!("uav.fixed_mw {} is not on the UAV grid", self.uav.fixed_mw)));
                }
            }
        }
        self.uav.hotboot.epsilon.validate()
    }

    /// Normalization ceilings: each link's median plus three shadowing
    /// deviations plus the configured headroom. Geometry links use the
    /// closest distance the roaming user can reach.
    pub fn feature_scale(&self) -> FeatureScale {
        let top = |mean_db: f64, sigma_db: f64| db_to_linear(mean_db + 3.0 * sigma_db + self.channel.headroom_db);
        let max_gain = match &self.channel.model {
            ChannelModel::Abstract(links) => links.map(|l| top(l.mean_db, l.sigma_db)),
            ChannelModel::Geometry(g) => {
                let geo = &g.geometry;
                let d = geo.distances();
                let params = g.link_params();
                let mut out = [0.0; 5];
                for i in 0..5 {
                    let d = if i < 2 { d[i] - geo.cell_radius } else { d[i] };
                    out[i] = top(params[i].mean_db_at(d), params[i].shadow_sigma_db);
                }
                out
            }
        };
        FeatureScale { max_gain, max_jam_power: self.radio.max_jam_power }
    }

    fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        let r = &self.radio;
        put("radio.user_mw", r.user_power.to_string());
        put("radio.user_limit_mw", r.user_power_limit.to_string());
        put("radio.noise_mw", r.noise_power.to_string());
        put("radio.relay_cost", r.relay_cost.to_string());
        put("radio.jam_cost", r.jam_cost.to_string());
        put("radio.uav_max_mw", r.max_uav_power.to_string());
        put("radio.jam_max_mw", r.max_jam_power.to_string());
        put("radio.slot_s", r.slot_duration.to_string());
        let c = &self.channel;
        put("channel.case", if c.case == ObservationCase::Ideal { "1" } else { "2" }.to_string());
        put("channel.noise_sigma", c.noise_sigma.to_string());
        put("channel.headroom_db", c.headroom_db.to_string());
        match &c.model {
            ChannelModel::Abstract(links) => {
                put("channel.mode", "abstract".into());
                for (name, l) in LINKS.iter().zip(links) {
                    put(&format!("channel.{name}_mean_db"), l.mean_db.to_string());
                    put(&format!("channel.{name}_sigma_db"), l.sigma_db.to_string());
                }
            }
            ChannelModel::Geometry(g) => {
                put("channel.mode", "geometry".into());
                let geo = &g.geometry;
                for (k, v) in [
                    ("user_x", geo.user.x),
                    ("user_y", geo.user.y),
                    ("bs0_x", geo.bs0.x),
                    ("bs0_y", geo.bs0.y),
                    ("bs1_x", geo.bs1.x),
                    ("bs1_y", geo.bs1.y),
                    ("jammer_x", geo.jammer.x),
                    ("jammer_y", geo.jammer.y),
                    ("uav_x", geo.uav.x),
                    ("uav_y", geo.uav.y),
                    ("uav_z", geo.uav.z),
                    ("cell_radius", geo.cell_radius),
                    ("speed_min", g.speed_min),
                    ("speed_max", g.speed_max),
                    ("ground_ref_db", g.ground.mean_db_at_ref),
                    ("ground_exp", g.ground.pathloss_exp),
                    ("ground_sigma_db", g.ground.shadow_sigma_db),
                    ("air_ref_db", g.air.mean_db_at_ref),
                    ("air_exp", g.air.pathloss_exp),
                    ("air_sigma_db", g.air.shadow_sigma_db),
                ] {
                    put(&format!("channel.{k}"), v.to_string());
                }
            }
        }
        let u = &self.uav;
        put("uav.agent", u.kind.name().into());
        put("uav.step_mw", u.step_mw.to_string());
        put("uav.fixed_mw", u.fixed_mw.to_string());
        put("uav.history", u.drlur.history.to_string());
        put("uav.learning_rate", u.drlur.train.learning_rate.to_string());
        put("uav.batch", u.drlur.train.batch_size.to_string());
        put("uav.gamma", u.drlur.train.gamma.to_string());
        put("uav.eps_start", u.drlur.epsilon.start.to_string());
        put("uav.eps_end", u.drlur.epsilon.end.to_string());
        put("uav.eps_decay_slots", u.drlur.epsilon.decay_slots.to_string());
        put("uav.replay_capacity", u.drlur.replay_capacity.to_string());
        put("uav.target_period", u.drlur.target_period.to_string());
        put("uav.fc1_units", u.drlur.arch.r1.to_string());
        put("uav.tab_alpha", u.tabular.alpha.to_string());
        put("uav.tab_gamma", u.tabular.gamma.to_string());
        put("uav.tab_delta", u.tabular.delta.to_string());
        put("uav.tab_rho_bins", u.tabular.rho_bins.to_string());
        put("uav.tab_eps_start", u.tabular.epsilon.start.to_string());
        put("uav.tab_eps_end", u.tabular.epsilon.end.to_string());
        put("uav.tab_eps_decay_slots", u.tabular.epsilon.decay_slots.to_string());
        put("uav.hotboot_scenarios", u.hotboot.scenarios.to_string());
        put("uav.hotboot_slots", u.hotboot.slots.to_string());
        put("uav.hotboot_seed", u.hotboot.seed.to_string());
        put("uav.hotboot_eps_start", u.hotboot.epsilon.start.to_string());
        put("uav.hotboot_eps_end", u.hotboot.epsilon.end.to_string());
        put("uav.hotboot_eps_decay_slots", u.hotboot.epsilon.decay_slots.to_string());
        let j = &self.jammer;
        let step = if j.grid.len() > 1 { j.grid.level(1) } else { j.grid.max() };
        put("jammer.kind", j.kind.name().into());
        put("jammer.level_mw", j.level.to_string());
        put("jammer.step_mw", step.to_string());
        put("jammer.alpha", j.alpha.to_string());
        put("jammer.gamma", j.gamma.to_string());
        put("jammer.eps_start", j.epsilon.start.to_string());
        put("jammer.eps_end", j.epsilon.end.to_string());
        put("jammer.eps_decay_slots", j.epsilon.decay_slots.to_string());
        put("jammer.rho_bins", j.rho_bins.to_string());
        put("run.slots", self.run.slots.to_string());
        put("run.seed", self.run.seed.to_string());
        put("run.window", self.run.window.to_string());
        out.sort();
        out
    }

    /// Canonical text: every key, sorted, one per line.
    pub fn to_text(&self) -> String {
        self.pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn digest(&self) -> u64 {
        fnv1a64(self.to_text().as_bytes())
    }

    /// Digest of everything except the `run` section and the pretraining
    /// budget, so runs of one scenario with different seeds or lengths share
    /// hotboot artifacts.
    pub fn scenario_hash(&self) -> u64 {
        let text: String = self
            .pairs()
            .into_iter()
            .filter(|(k, _)| !k.starts_with("run.") && !k.starts_with("uav.hotboot_"))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        fnv1a64(text.as_bytes())
    }
}
