//! Static, reactive and Q-learning jammers.

use crate::agents::{ActionGrid, EpsilonSchedule};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::tabular::{epsilon_greedy, Discretizer, QTable, StateKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JammerKind {
    Static,
    /// Jams at the configured level only after the UAV relayed in the previous slot.
    Reactive,
    Smart,
}

impl JammerKind {
    pub fn name(self) -> &'static str {
        match self {
            JammerKind::Static => "static",
            JammerKind::Reactive => "reactive",
            JammerKind::Smart => "smart",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "static" => Some(JammerKind::Static),
            "reactive" => Some(JammerKind::Reactive),
            "smart" => Some(JammerKind::Smart),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JammerConfig {
    pub kind: JammerKind,
    /// Power of the static and reactive jammers in mW.
    pub level: f64,
    pub grid: ActionGrid,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub rho_bins: usize,
}

impl Default for JammerConfig {
    fn default() -> Self {
        Self {
            kind: JammerKind::Smart,
            level: 0.0,
            grid: ActionGrid::uniform(80.0, 5.0).expect("valid grid"),
            alpha: 0.1,
            gamma: 0.95,
            epsilon: EpsilonSchedule { start: 0.9, end: 0.01, decay_slots: 1000 },
            rho_bins: 10,
        }
    }
}

impl JammerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kind != JammerKind::Smart && self.grid.index_of(self.level).is_none() {
            return Err(Error::Config(format!("jammer level {} is not on the jammer grid", self.level)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !(0.0..1.0).contains(&self.gamma) || self.rho_bins == 0 {
            return Err(Error::Config("jammer alpha, gamma or rho_bins out of range".into()));
        }
        self.epsilon.validate()
    }
}

#[derive(Clone, Debug)]
pub struct Jammer {
    cfg: JammerConfig,
    disc: Discretizer,
    table: QTable,
    decisions: usize,
    pending: Option<(StateKey, usize)>,
}

impl Jammer {
    pub fn new(cfg: JammerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            disc: Discretizer::uniform(&[(0.0, 0.5, cfg.rho_bins)])?,
            table: QTable::new(cfg.grid.len()),
            decisions: 0,
            pending: None,
            cfg,
        })
    }

    pub fn kind(&self) -> JammerKind {
        self.cfg.kind
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.cfg.grid
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon.value(self.decisions)
    }

    /// Greedy smart-jammer level for a given previous-slot user BER.
    pub fn greedy_power(&self, rho1_prev: f64) -> f64 {
        let s = self.disc.bin(0, rho1_prev) as StateKey;
        self.cfg.grid.level(crate::tabular::argmax(&self.table.values(s)))
    }

    /// Jamming power in mW for the coming slot, from slot `k - 1` feedback only.
    pub fn act(&mut self, rho1_prev: f64, relayed_prev: bool, stream: &mut RandomStream) -> Result<f64> {
        match self.cfg.kind {
            JammerKind::Static => Ok(self.cfg.level),
            JammerKind::Reactive => Ok(if relayed_prev { self.cfg.level } else { 0.0 }),
            JammerKind::Smart => {
                let s = self.disc.bin(0, rho1_prev) as StateKey;
                let a = epsilon_greedy(&self.table.values(s), self.epsilon(), stream)?;
                self.decisions += 1;
                self.pending = Some((s, a));
                Ok(self.cfg.grid.level(a))
            }
        }
    }

    pub fn learn(&mut self, u_jam: f64, rho1_next: f64) -> Result<()> {
        if self.cfg.kind != JammerKind::Smart {
            return Ok(());
        }
        let (s, a) = self
            .pending
            .take()
            .ok_or_else(|| Error::Structural("jammer learn called without a preceding act".into()))?;
        let s_next = self.disc.bin(0, rho1_next) as StateKey;
        self.table.q_update(s, a, u_jam, s_next, self.cfg.alpha, self.cfg.gamma);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelGains;
    use crate::phy::{jammer_utility, uav_utility};

    #[test]
    fn static_and_reactive() {
        let mut s = RandomStream::new(1);
        let mut j = Jammer::new(JammerConfig { kind: JammerKind::Static, ..JammerConfig::default() }).unwrap();
        for _ in 0..10 {
            assert_eq!(j.act(0.3, true, &mut s).unwrap(), 0.0);
            j.learn(-1.0, 0.1).unwrap();
        }
        assert_eq!(j.table().visited_states(), 0);
        let cfg = JammerConfig { kind: JammerKind::Reactive, level: 40.0, ..JammerConfig::default() };
        let mut j = Jammer::new(cfg).unwrap();
        assert_eq!(j.act(0.3, false, &mut s).unwrap(), 0.0);
        assert_eq!(j.act(0.3, true, &mut s).unwrap(), 40.0);
        let off_grid = JammerConfig { kind: JammerKind::Static, level: 3.0, ..JammerConfig::default() };
        assert!(Jammer::new(off_grid).is_err());
    }

    #[test]
    fn one_step_learning_copies_reward() {
        let cfg = JammerConfig { alpha: 1.0, gamma: 0.0, ..JammerConfig::default() };
        let mut j = Jammer::new(cfg).unwrap();
        let mut s = RandomStream::new(2);
        let y = j.act(0.12, false, &mut s).unwrap();
        j.learn(0.37, 0.2).unwrap();
        let a = j.grid().index_of(y).unwrap();
        assert_eq!(j.table().get(2, a), 0.37);
    }

    #[test]
    fn learns_grid_best_response_against_silent_uav() {
        let h = ChannelGains::from_array([1e-6, 1e-6, 2e-6, 1e-6, 1e-5]);
        let (p, noise, cj) = (50.0, 1e-4, 0.001);
        let u_j = |y: f64| jammer_utility(uav_utility(p, 0.0, y, &h, noise, 0.001), y, cj);
        let grid = JammerConfig::default().grid;
        let oracle = (0..grid.len())
            .map(|i| grid.level(i))
            .max_by(|a, b| u_j(*a).partial_cmp(&u_j(*b)).unwrap())
            .unwrap();
        let cfg = JammerConfig { gamma: 0.0, alpha: 0.5, ..JammerConfig::default() };
        let mut j = Jammer::new(cfg).unwrap();
        let mut s = RandomStream::new(3);
        let rho = 0.5 * libm::erfc((p * h.h1 / noise).sqrt());
        for _ in 0..3000 {
            let y = j.act(rho, false, &mut s).unwrap();
            j.learn(u_j(y), rho).unwrap();
        }
        assert_eq!(j.greedy_power(rho), oracle);
    }
}
