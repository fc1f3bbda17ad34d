//! Tabular benchmark relay agents: hotbooted PHC (HPUR) and plain Q-learning.

use crate::agents::{ActionGrid, EpsilonSchedule, UavState};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::tabular::{epsilon_greedy, Discretizer, MixedPolicy, QTable, StateKey, TabularArtifact};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TabularUavConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// PHC policy step.
    pub delta: f64,
    /// Bins per BER component of the state.
    pub rho_bins: usize,
    /// Exploration of the Q-learning agent; HPUR explores through its policy.
    pub epsilon: EpsilonSchedule,
}

impl Default for TabularUavConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.95,
            delta: 0.01,
            rho_bins: 5,
            epsilon: EpsilonSchedule { start: 0.9, end: 0.01, decay_slots: 1000 },
        }
    }
}

impl TabularUavConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("tabular alpha {} / gamma {} out of range", self.alpha, self.gamma)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) || self.rho_bins == 0 {
            return Err(Error::Config("tabular delta must be in (0, 1] and rho_bins positive".into()));
        }
        self.epsilon.validate()
    }

    fn discretizer(&self) -> Discretizer {
        Discretizer::uniform(&[(0.0, 0.5, self.rho_bins); 3]).expect("validated bins")
    }
}

fn check_artifact(artifact: &TabularArtifact, grid: &ActionGrid) -> Result<()> {
    if artifact.table.actions() != grid.len() {
        return Err(Error::Config(format!(
            "stored table has {} actions, grid has {}",
            artifact.table.actions(),
            grid.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct HpurAgent {
    cfg: TabularUavConfig,
    disc: Discretizer,
    table: QTable,
    policy: MixedPolicy,
    pending: Option<(StateKey, usize)>,
}

impl HpurAgent {
    pub fn new(cfg: TabularUavConfig, grid: &ActionGrid) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            disc: cfg.discretizer(),
            table: QTable::new(grid.len()),
            policy: MixedPolicy::new(grid.len()),
            pending: None,
            cfg,
        })
    }

    pub fn from_artifact(cfg: TabularUavConfig, grid: &ActionGrid, artifact: TabularArtifact) -> Result<Self> {
        check_artifact(&artifact, grid)?;
        let mut agent = Self::new(cfg, grid)?;
        agent.table = artifact.table;
        if let Some(p) = artifact.policy {
            agent.policy = p;
        }
        Ok(agent)
    }

    pub fn policy_mut(&mut self) -> &mut MixedPolicy {
        &mut self.policy
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn state_key(&self, state: &UavState) -> StateKey {
        self.disc.key(&state.rho).expect("three features")
    }

    pub fn begin_episode(&mut self) {
        self.pending = None;
    }

    pub fn act(&mut self, state: &UavState, stream: &mut RandomStream) -> Result<usize> {
        let s = self.state_key(state);
        let a = self.policy.sample(s, stream);
        self.pending = Some((s, a));
        Ok(a)
    }

    pub fn learn(&mut self, utility: f64, next: &UavState) -> Result<()> {
        let (s, a) = self
            .pending
            .take()
            .ok_or_else(|| Error::Structural("learn called without a preceding act".into()))?;
        let s_next = self.state_key(next);
        self.table.q_update(s, a, utility, s_next, self.cfg.alpha, self.cfg.gamma);
        self.policy.phc_update(&self.table, s, self.cfg.delta);
        Ok(())
    }

    pub fn artifact(&self) -> TabularArtifact {
        TabularArtifact { table: self.table.clone(), policy: Some(self.policy.clone()) }
    }
}

#[derive(Clone, Debug)]
pub struct QLearnAgent {
    cfg: TabularUavConfig,
    disc: Discretizer,
    table: QTable,
    decisions: usize,
    pending: Option<(StateKey, usize)>,
}

impl QLearnAgent {
    pub fn new(cfg: TabularUavConfig, grid: &ActionGrid) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { disc: cfg.discretizer(), table: QTable::new(grid.len()), decisions: 0, pending: None, cfg })
    }

    pub fn from_artifact(cfg: TabularUavConfig, grid: &ActionGrid, artifact: TabularArtifact) -> Result<Self> {
        check_artifact(&artifact, grid)?;
        let mut agent = Self::new(cfg, grid)?;
        agent.table = artifact.table;
        Ok(agent)
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn begin_episode(&mut self) {
        self.pending = None;
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon.value(self.decisions)
    }

    pub fn act(&mut self, state: &UavState, stream: &mut RandomStream) -> Result<usize> {
        let s = self.disc.key(&state.rho)?;
        let a = epsilon_greedy(&self.table.values(s), self.epsilon(), stream)?;
        self.decisions += 1;
        self.pending = Some((s, a));
        Ok(a)
    }

    pub fn learn(&mut self, utility: f64, next: &UavState) -> Result<()> {
        let (s, a) = self
            .pending
            .take()
            .ok_or_else(|| Error::Structural("learn called without a preceding act".into()))?;
        let s_next = self.disc.key(&next.rho)?;
        self.table.q_update(s, a, utility, s_next, self.cfg.alpha, self.cfg.gamma);
        Ok(())
    }

    pub fn artifact(&self) -> TabularArtifact {
        TabularArtifact { table: self.table.clone(), policy: None }
    }
}
