use crate::agents::{
    ActionGrid, DrlurAgent, HotbootArtifact, HpurAgent, Jammer, QLearnAgent, UavAgent, UavState,
};
use crate::channel::{
    gains_from_abstract, gains_from_geometry, observe, ChannelGains, FeatureScale, Geometry, Mobility,
    UavObservation,
};
use crate::error::{Error, Result};
use crate::game::config::{ChannelModel, ScenarioConfig, UavKind};
use crate::game::trace::{SlotRecord, Trace};
use crate::numerics::RandomStream;
use crate::phy;

/// Builds the configured UAV agent, loading `hotboot` when given.
pub fn build_uav_agent(
    cfg: &ScenarioConfig,
    hotboot: Option<&HotbootArtifact>,
    init_stream: &mut RandomStream,
) -> Result<UavAgent> {
    let grid = cfg.uav_grid()?;
    let u = &cfg.uav;
    let mismatch = || Error::Config(format!("hotboot artifact does not fit a {} agent", u.kind.name()));
    Ok(match u.kind {
        UavKind::Drlur => {
            let agent = match hotboot {
                None => DrlurAgent::fresh(u.drlur.clone(), grid, init_stream)?,
                Some(HotbootArtifact::Weights(w)) => {
                    let mut dc = u.drlur.clone();
                    dc.epsilon = u.hotboot.epsilon;
                    DrlurAgent::new(dc, grid, w.clone())?
                }
                Some(_) => return Err(mismatch()),
            };
            UavAgent::Drlur(Box::new(agent))
        }
        UavKind::Hpur => UavAgent::Hpur(match hotboot {
            None => HpurAgent::new(u.tabular, &grid)?,
            Some(HotbootArtifact::Table(t)) => HpurAgent::from_artifact(u.tabular, &grid, t.clone())?,
            Some(_) => return Err(mismatch()),
        }),
        UavKind::QLearn => UavAgent::QLearn(match hotboot {
            None => QLearnAgent::new(u.tabular, &grid)?,
            Some(HotbootArtifact::Table(t)) => {
                let mut tc = u.tabular;
                tc.epsilon = u.hotboot.epsilon;
                QLearnAgent::from_artifact(tc, &grid, t.clone())?
            }
            Some(_) => return Err(mismatch()),
        }),
        UavKind::Fixed => {
            if hotboot.is_some() {
                return Err(mismatch());
            }
            UavAgent::Fixed(grid.index_of(u.fixed_mw).ok_or_else(|| Error::Config("fixed power off grid".into()))?)
        }
    })
}

struct Streams {
    mobility: RandomStream,
    channel: RandomStream,
    observe: RandomStream,
    uav: RandomStream,
    jammer: RandomStream,
}

/// One episode in progress: channels, both agents and the slot history.
pub struct World {
    cfg: ScenarioConfig,
    grid: ActionGrid,
    scale: FeatureScale,
    uav: UavAgent,
    jammer: Jammer,
    geometry: Option<Geometry>,
    mobility: Option<Mobility>,
    streams: Streams,
    gains_history: Vec<ChannelGains>,
    jam_history: Vec<f64>,
    rho_prev: [f64; 3],
    relayed_prev: bool,
    next_state: UavState,
    k: usize,
}

impl World {
    /// A fresh world for `cfg`, with the UAV agent built from `hotboot` or
    /// freshly initialized.
    pub fn new(cfg: &ScenarioConfig, hotboot: Option<&HotbootArtifact>) -> Result<Self> {
        cfg.validate()?;
        let mut init = RandomStream::new(cfg.run.seed).split("init");
        let agent = build_uav_agent(cfg, hotboot, &mut init)?;
        Self::with_agent(cfg, agent)
    }

    /// A world that continues training an existing agent.
    pub fn with_agent(cfg: &ScenarioConfig, mut uav: UavAgent) -> Result<Self> {
        cfg.validate()?;
        let root = RandomStream::new(cfg.run.seed);
        let mut streams = Streams {
            mobility: root.split("mobility"),
            channel: root.split("channel"),
            observe: root.split("observe"),
            uav: root.split("uav"),
            jammer: root.split("jammer"),
        };
        let (geometry, mobility) = match &cfg.channel.model {
            ChannelModel::Abstract(_) => (None, None),
            ChannelModel::Geometry(g) => {
                let m = Mobility::start(
                    g.geometry.user,
                    g.cell_center(),
                    g.geometry.cell_radius,
                    (g.speed_min, g.speed_max),
                    &mut streams.mobility,
                );
                (Some(g.geometry.clone()), Some(m))
            }
        };
        uav.begin_episode();
        Ok(Self {
            grid: cfg.uav_grid()?,
            scale: cfg.feature_scale(),
            jammer: Jammer::new(cfg.jammer.clone())?,
            uav,
            geometry,
            mobility,
            streams,
            gains_history: Vec::with_capacity(cfg.run.slots),
            jam_history: Vec::with_capacity(cfg.run.slots),
            rho_prev: [0.25; 3],
            relayed_prev: false,
            next_state: UavState::neutral(),
            k: 0,
            cfg: cfg.clone(),
        })
    }

    pub fn slot(&self) -> usize {
        self.k
    }

    pub fn uav(&self) -> &UavAgent {
        &self.uav
    }

    pub fn jammer(&self) -> &Jammer {
        &self.jammer
    }

    pub fn into_agent(self) -> UavAgent {
        self.uav
    }

    fn sample_gains(&mut self) -> Result<ChannelGains> {
        let s = &mut self.streams;
        match &self.cfg.channel.model {
            ChannelModel::Abstract(links) => gains_from_abstract(links, &mut s.channel),
            ChannelModel::Geometry(g) => {
                let geo = self.geometry.as_mut().expect("geometry mode");
                let m = self.mobility.as_mut().expect("geometry mode");
                m.step(
                    g.cell_center(),
                    g.geometry.cell_radius,
                    (g.speed_min, g.speed_max),
                    self.cfg.radio.slot_duration,
                    &mut s.mobility,
                )?;
                geo.user = m.pos;
                gains_from_geometry(geo, &g.link_params(), &mut s.channel)
            }
        }
    }

    /// Runs the next slot and returns its record.
    pub fn step(&mut self) -> Result<SlotRecord> {
        self.k += 1;
        let k = self.k;
        let radio = &self.cfg.radio;
        let (p, noise) = (radio.user_power, radio.noise_power);

        let gains = self.sample_gains()?;
        if !gains.is_valid() {
            return Err(Error::Numeric(format!("slot {k}: invalid channel gains {gains:?}")));
        }
        let y = self.jammer.act(self.rho_prev[0], self.relayed_prev, &mut self.streams.jammer)?;
        let eps = self.uav.epsilon(k);
        let state = self.next_state;
        let a = self.uav.act(k, &state, &mut self.streams.uav)?;
        let x = self.grid.level(a);

        let radio = &self.cfg.radio;
        let rho = phy::ber_vector(p, x, y, &gains, noise)?;
        let pe = phy::message_ber(p, x, y, &gains, noise);
        let u_uav = phy::uav_utility(p, x, y, &gains, noise, radio.relay_cost);
        let u_jam = phy::jammer_utility(u_uav, y, radio.jam_cost);
        let energy = phy::slot_energy(p, x, radio.slot_duration);

        self.gains_history.push(gains);
        self.jam_history.push(y);
        let obs = match observe(
            &self.gains_history,
            &self.jam_history,
            k + 1,
            self.cfg.channel.case,
            self.cfg.channel.noise_sigma,
            &self.scale,
            &mut self.streams.observe,
        ) {
            Ok(o) => o,
            Err(Error::ColdStart(_)) => UavObservation::neutral(&self.scale),
            Err(e) => return Err(e),
        };
        self.next_state = UavState::from_observation(rho, &obs, &self.scale);
        self.uav.learn(u_uav, &self.next_state, &mut self.streams.uav)?;
        self.jammer.learn(u_jam, rho[0])?;
        self.rho_prev = rho;
        self.relayed_prev = x > 0.0;

        let record = SlotRecord { slot: k, x, y, rho, pe, u_uav, u_jam, energy, eps, gains };
        if !record.is_finite() {
            return Err(Error::Numeric(format!("slot {k}: non-finite record {record:?}")));
        }
        Ok(record)
    }

    /// Runs `slots` slots and collects the trace.
    pub fn run(&mut self, slots: usize) -> Result<Trace> {
        let mut records = Vec::with_capacity(slots);
        for _ in 0..slots {
            records.push(self.step()?);
        }
        Ok(Trace {
            config_digest: self.cfg.digest(),
            records,
            artifact_digest: self.uav.artifact_digest(),
        })
    }
}
