//! Deep-RL relay agent: an experience-sequence CNN trained by replayed SGD.

use std::collections::VecDeque;

use crate::agents::{
    build_sequence_matrix, ActionGrid, EpsilonSchedule, Experience, ReplayPool, SequenceLayout, SequenceMatrix,
    UavState,
};
use crate::error::{Error, Result};
use crate::nn::{self, CnnArchitecture, CnnWeights, Sample};
use crate::numerics::RandomStream;
use crate::tabular::epsilon_greedy;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Experiences replayed per slot (M).
    pub batch_size: usize,
    /// Discount factor.
    pub gamma: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, batch_size: 16, gamma: 0.95 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrlurConfig {
    pub arch: CnnArchitecture,
    /// States per experience sequence (E).
    pub history: usize,
    pub train: TrainConfig,
    pub epsilon: EpsilonSchedule,
    pub replay_capacity: usize,
    /// Refresh period of a frozen target copy; 0 bootstraps from the live network.
    pub target_period: usize,
}

impl Default for DrlurConfig {
    fn default() -> Self {
        Self {
            arch: CnnArchitecture::default(),
            history: 13,
            train: TrainConfig::default(),
            epsilon: EpsilonSchedule { start: 0.9, end: 0.01, decay_slots: 1000 },
            replay_capacity: 10_000,
            target_period: 0,
        }
    }
}

impl DrlurConfig {
    pub fn validate(&self, grid: &ActionGrid) -> Result<()> {
        self.arch.validate().map_err(|e| Error::Config(e.to_string()))?;
        if grid.len() != self.arch.r2 {
            return Err(Error::Config(format!(
                "UAV grid has {} levels but the network has {} outputs",
                grid.len(),
                self.arch.r2
            )));
        }
        SequenceLayout::new(self.history, self.arch.n1)?;
        if self.train.batch_size == 0 || !(self.train.learning_rate > 0.0) {
            return Err(Error::Config("batch size and learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.train.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1)", self.train.gamma)));
        }
        if self.replay_capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        self.epsilon.validate()
    }
}

#[derive(Clone, Debug)]
pub struct DrlurAgent {
    cfg: DrlurConfig,
    layout: SequenceLayout,
    grid: ActionGrid,
    weights: CnnWeights,
    target: Option<CnnWeights>,
    pool: ReplayPool,
    states: VecDeque<UavState>,
    actions: VecDeque<f64>,
    pending: Option<(SequenceMatrix, usize)>,
    /// Decisions taken over the agent's lifetime; drives the epsilon schedule.
    decisions: usize,
    updates: usize,
    last_loss: Option<f64>,
}

impl DrlurAgent {
    pub fn new(cfg: DrlurConfig, grid: ActionGrid, weights: CnnWeights) -> Result<Self> {
        cfg.validate(&grid)?;
        if weights.arch() != &cfg.arch {
            return Err(Error::Config("weights do not match the configured architecture".into()));
        }
        let layout = SequenceLayout::new(cfg.history, cfg.arch.n1)?;
        let target = (cfg.target_period > 0).then(|| weights.clone());
        Ok(Self {
            layout,
            grid,
            pool: ReplayPool::new(cfg.replay_capacity),
            target,
            weights,
            states: VecDeque::new(),
            actions: VecDeque::new(),
            pending: None,
            decisions: 0,
            updates: 0,
            last_loss: None,
            cfg,
        })
    }

    /// Fresh agent with He-initialized weights.
    pub fn fresh(cfg: DrlurConfig, grid: ActionGrid, stream: &mut RandomStream) -> Result<Self> {
        let w = CnnWeights::init(cfg.arch, stream);
        Self::new(cfg, grid, w)
    }

    pub fn config(&self) -> &DrlurConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &CnnWeights {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut CnnWeights {
        &mut self.weights
    }

    pub fn pool(&self) -> &ReplayPool {
        &self.pool
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    pub fn set_epsilon_schedule(&mut self, schedule: EpsilonSchedule) {
        self.cfg.epsilon = schedule;
    }

    pub fn begin_episode(&mut self) {
        self.states.clear();
        self.actions.clear();
        self.pending = None;
    }

    /// Exploration in force at episode slot `k`: 1 during the random warm-up.
    pub fn epsilon(&self, k: usize) -> f64 {
        if k <= self.cfg.history {
            1.0
        } else {
            self.cfg.epsilon.value(self.decisions)
        }
    }

    pub fn q_values(&self, seq: &SequenceMatrix) -> Result<Vec<f64>> {
        nn::forward(&self.weights, seq.as_slice())
    }

    /// Current experience sequence, ending with the newest recorded state.
    pub fn current_sequence(&self) -> Result<SequenceMatrix> {
        let states: Vec<UavState> = self.states.iter().copied().collect();
        let actions: Vec<f64> = self.actions.iter().copied().collect();
        build_sequence_matrix(&self.layout, &states, &actions[actions.len() + 1 - states.len().max(1)..])
    }

    /// Picks the relay level for episode slot `k` (1-based). Uniformly random
    /// for the first `E` slots, epsilon-greedy on the CNN output afterwards.
    pub fn act(&mut self, k: usize, state: &UavState, stream: &mut RandomStream) -> Result<usize> {
        self.states.push_back(*state);
        while self.states.len() > self.cfg.history {
            self.states.pop_front();
        }
        while self.actions.len() + 1 > self.states.len() {
            self.actions.pop_front();
        }
        let seq = self.current_sequence()?;
        let eps = self.epsilon(k);
        let index = if k <= self.cfg.history {
            stream.below(self.grid.len())
        } else {
            let q = nn::forward(&self.weights, seq.as_slice())?;
            epsilon_greedy(&q, eps, stream)?
        };
        self.actions.push_back(self.grid.normalized(index));
        self.pending = Some((seq, index));
        self.decisions += 1;
        Ok(index)
    }

    /// Stores the experience of the last decision, replays `M` experiences
    /// and takes one SGD step. Returns the minibatch loss.
    pub fn learn(&mut self, utility: f64, next: &UavState, stream: &mut RandomStream) -> Result<f64> {
        let (seq, action) = self
            .pending
            .take()
            .ok_or_else(|| Error::Structural("learn called without a preceding act".into()))?;
        if !utility.is_finite() {
            return Err(Error::Numeric(format!("non-finite utility {utility}")));
        }
        let keep = self.cfg.history - 1;
        let mut states: Vec<UavState> = self.states.iter().skip(self.states.len().saturating_sub(keep)).copied().collect();
        states.push(*next);
        let actions: Vec<f64> = self.actions.iter().skip(self.actions.len() + 1 - states.len()).copied().collect();
        let next_seq = build_sequence_matrix(&self.layout, &states, &actions)?;
        self.pool.push(Experience { seq, action, utility, next_seq });
        let loss = self.replay(stream)?;
        self.last_loss = Some(loss);
        Ok(loss)
    }

    fn replay(&mut self, stream: &mut RandomStream) -> Result<f64> {
        let batch = self.pool.sample(self.cfg.train.batch_size, stream);
        let next_inputs: Vec<&[f64]> = batch.iter().map(|e| e.next_seq.as_slice()).collect();
        let bootstrap = self.target.as_ref().unwrap_or(&self.weights);
        let next_q = nn::forward_batch(bootstrap, &next_inputs)?;
        let gamma = self.cfg.train.gamma;
        let samples: Vec<Sample<'_>> = batch
            .iter()
            .zip(&next_q)
            .map(|(e, q)| Sample {
                input: e.seq.as_slice(),
                action: e.action,
                target: e.utility + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect();
        let (loss, grads) = nn::loss_and_gradients(&self.weights, &samples)?;
        nn::sgd_step(&mut self.weights, &grads, self.cfg.train.learning_rate)?;
        if !self.weights.is_finite() {
            return Err(Error::Numeric("network weights diverged".into()));
        }
        self.updates += 1;
        if self.cfg.target_period > 0 && self.updates % self.cfg.target_period == 0 {
            self.target = Some(self.weights.clone());
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ActionGrid {
        ActionGrid::uniform(150.0, 5.0).unwrap()
    }

    #[test]
    fn grid_must_match_network_width() {
        let cfg = DrlurConfig::default();
        let small = ActionGrid::uniform(150.0, 10.0).unwrap();
        assert!(DrlurAgent::fresh(cfg, small, &mut RandomStream::new(1)).is_err());
    }

    #[test]
    fn constructed_argmax_is_played() {
        let cfg = DrlurConfig { epsilon: EpsilonSchedule::constant(0.0), ..DrlurConfig::default() };
        let arch = cfg.arch;
        let mut w = CnnWeights::zeros(arch);
        w.section_mut(arch.layout().fc2_b)[30] = 1.0;
        let mut agent = DrlurAgent::new(cfg, grid(), w).unwrap();
        let mut s = RandomStream::new(2);
        for k in 1..=40 {
            let a = agent.act(k, &UavState::neutral(), &mut s).unwrap();
            if k > 13 {
                assert_eq!(grid().level(a), 150.0);
            }
        }
    }

    #[test]
    fn single_sample_loss_is_exact() {
        let cfg = DrlurConfig {
            train: TrainConfig { learning_rate: 0.01, batch_size: 1, gamma: 0.5 },
            ..DrlurConfig::default()
        };
        let mut s = RandomStream::new(3);
        let mut agent = DrlurAgent::fresh(cfg, grid(), &mut s).unwrap();
        let state = UavState::neutral();
        let a = agent.act(1, &state, &mut s).unwrap();
        let before = agent.weights().clone();
        let loss = agent.learn(-0.2, &state, &mut s).unwrap();
        let e = agent.pool().newest().unwrap().clone();
        let q = nn::forward(&before, e.seq.as_slice()).unwrap();
        let qn = nn::forward(&before, e.next_seq.as_slice()).unwrap();
        let target = -0.2 + 0.5 * qn.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((loss - (q[a] - target).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn sequences_slide_by_one_state() {
        let mut s = RandomStream::new(4);
        let mut agent = DrlurAgent::fresh(DrlurConfig::default(), grid(), &mut s).unwrap();
        let states: Vec<UavState> = (0..30)
            .map(|i| UavState { rho: [i as f64 / 100.0; 3], gains: [0.5; 5], jam: 0.1 })
            .collect();
        for k in 1..30 {
            agent.act(k, &states[k - 1], &mut s).unwrap();
            agent.learn(-0.1, &states[k], &mut s).unwrap();
            let e = agent.pool().newest().unwrap();
            // next_seq of slot k equals the seq the agent builds at slot k + 1.
            let mut probe = agent.clone();
            probe.act(k + 1, &states[k], &mut s.clone()).unwrap();
            assert_eq!(probe.pending.as_ref().unwrap().0, e.next_seq);
        }
    }
}
