//! Decision makers: the deep-RL relay agent, the tabular benchmark relays and
//! the jammers.

mod drlur;
mod hotboot;
mod jammer;
mod replay;
mod sequence;
mod tabular_uav;

pub use drlur::{DrlurAgent, DrlurConfig, TrainConfig};
pub use hotboot::{hotboot, perturb_scenario, store_path, HotbootArtifact};
pub use jammer::{Jammer, JammerConfig, JammerKind};
pub use replay::{Experience, ReplayPool};
pub use sequence::{build_sequence_matrix, SequenceLayout, SequenceMatrix};
pub use tabular_uav::{HpurAgent, QLearnAgent, TabularUavConfig};

use crate::channel::{FeatureScale, UavObservation};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// Evenly spaced power levels from 0 to a maximum, inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionGrid {
    levels: Vec<f64>,
}

impl ActionGrid {
    pub fn uniform(max: f64, step: f64) -> Result<Self> {
        if !(max > 0.0) || !(step > 0.0) {
            return Err(Error::Config(format!("grid needs positive max and step, got {max}, {step}")));
        }
        let n = (max / step).round();
        if (n * step - max).abs() > 1e-9 * max {
            return Err(Error::Config(format!("step {step} does not divide max {max}")));
        }
        let n = n as usize;
        Ok(Self { levels: (0..=n).map(|i| if i == n { max } else { i as f64 * step }).collect() })
    }

    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels[0] != 0.0 || levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid levels must start at 0 and increase".into()));
        }
        Ok(Self { levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> f64 {
        self.levels[index]
    }

    pub fn max(&self) -> f64 {
        *self.levels.last().expect("non-empty grid")
    }

    /// Level mapped onto [0, 1].
    pub fn normalized(&self, index: usize) -> f64 {
        let max = self.max();
        if max > 0.0 {
            self.levels[index] / max
        } else {
            0.0
        }
    }

    pub fn index_of(&self, power: f64) -> Option<usize> {
        self.levels.iter().position(|&l| (l - power).abs() <= 1e-9 * self.max().max(1.0))
    }
}

/// Linear exploration schedule: `start` at slot 0 falling to `end` at
/// `decay_slots`, constant afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_slots: usize,
}

impl EpsilonSchedule {
    pub fn constant(eps: f64) -> Self {
        Self { start: eps, end: eps, decay_slots: 0 }
    }

    pub fn value(&self, step: usize) -> f64 {
        if self.decay_slots == 0 || step >= self.decay_slots {
            return self.end;
        }
        self.start + (self.end - self.start) * step as f64 / self.decay_slots as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.start) || !(0.0..=1.0).contains(&self.end) {
            return Err(Error::Config(format!("epsilon schedule outside [0, 1]: {self:?}")));
        }
        Ok(())
    }
}

/// UAV state `[rho(k-1), h_hat(k-1), y_hat(k-1)]`; gains and jamming power
/// normalized to [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UavState {
    pub rho: [f64; 3],
    pub gains: [f64; 5],
    pub jam: f64,
}

impl UavState {
    pub const LEN: usize = 9;

    /// Mid-scale state used before any history exists.
    pub fn neutral() -> Self {
        Self { rho: [0.25; 3], gains: [0.5; 5], jam: 0.5 }
    }

    pub fn from_observation(rho: [f64; 3], obs: &UavObservation, scale: &FeatureScale) -> Self {
        Self {
            rho: rho.map(|r| r.clamp(0.0, 0.5)),
            gains: scale.gain_to_unit(&obs.est_gains),
            jam: scale.jam_to_unit(obs.est_jam_power),
        }
    }

    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(&self.rho);
        out[3..8].copy_from_slice(&self.gains);
        out[8] = self.jam;
        out
    }

    pub fn from_array(v: &[f64]) -> Self {
        Self {
            rho: [v[0], v[1], v[2]],
            gains: [v[3], v[4], v[5], v[6], v[7]],
            jam: v[8],
        }
    }
}

/// The relay agent driving the UAV.
#[derive(Clone, Debug)]
pub enum UavAgent {
    Drlur(Box<DrlurAgent>),
    Hpur(HpurAgent),
    QLearn(QLearnAgent),
    /// Always plays the given grid index; used for controlled experiments.
    Fixed(usize),
}

impl UavAgent {
    pub fn name(&self) -> &'static str {
        match self {
            UavAgent::Drlur(_) => "drlur",
            UavAgent::Hpur(_) => "hpur",
            UavAgent::QLearn(_) => "qlearn",
            UavAgent::Fixed(_) => "fixed",
        }
    }

    /// Resets per-episode history, keeping learned parameters.
    pub fn begin_episode(&mut self) {
        match self {
            UavAgent::Drlur(a) => a.begin_episode(),
            UavAgent::Hpur(a) => a.begin_episode(),
            UavAgent::QLearn(a) => a.begin_episode(),
            UavAgent::Fixed(_) => {}
        }
    }

    /// Exploration rate the agent will use at episode slot `k`.
    pub fn epsilon(&self, k: usize) -> f64 {
        match self {
            UavAgent::Drlur(a) => a.epsilon(k),
            UavAgent::QLearn(a) => a.epsilon(),
            UavAgent::Hpur(_) | UavAgent::Fixed(_) => 0.0,
        }
    }

    /// Chooses a grid index for slot `k` from the state observed at its start.
    pub fn act(&mut self, k: usize, state: &UavState, stream: &mut RandomStream) -> Result<usize> {
        match self {
            UavAgent::Drlur(a) => a.act(k, state, stream),
            UavAgent::Hpur(a) => a.act(state, stream),
            UavAgent::QLearn(a) => a.act(state, stream),
            UavAgent::Fixed(i) => Ok(*i),
        }
    }

    /// Feeds back the slot utility and the state for the next slot.
    pub fn learn(&mut self, utility: f64, next: &UavState, stream: &mut RandomStream) -> Result<()> {
        match self {
            UavAgent::Drlur(a) => a.learn(utility, next, stream).map(|_| ()),
            UavAgent::Hpur(a) => a.learn(utility, next),
            UavAgent::QLearn(a) => a.learn(utility, next),
            UavAgent::Fixed(_) => Ok(()),
        }
    }

    pub fn artifact(&self) -> Option<HotbootArtifact> {
        match self {
            UavAgent::Drlur(a) => Some(HotbootArtifact::Weights(a.weights().clone())),
            UavAgent::Hpur(a) => Some(HotbootArtifact::Table(a.artifact())),
            UavAgent::QLearn(a) => Some(HotbootArtifact::Table(a.artifact())),
            UavAgent::Fixed(_) => None,
        }
    }

    pub fn artifact_digest(&self) -> Option<u64> {
        self.artifact().map(|a| a.digest())
    }
}
