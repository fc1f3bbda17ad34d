//! Tabular Q-learning and policy hill climbing, shared by the smart jammer
//! and the benchmark UAV agents.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::util::atomic_write;

pub const TABLE_MAGIC: &[u8; 4] = b"UAVT";
pub const TABLE_VERSION: u16 = 1;

/// Index of a discretized state.
pub type StateKey = u32;

/// Uniform binning of each feature over a closed range; out-of-range values
/// fall into the end bins.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretizer {
    features: Vec<(f64, f64, usize)>,
}

impl Discretizer {
    pub fn uniform(features: &[(f64, f64, usize)]) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Config("discretizer needs at least one feature".into()));
        }
        for &(lo, hi, bins) in features {
            if !(hi > lo) || bins == 0 {
                return Err(Error::Config(format!("bad bin spec ({lo}, {hi}, {bins})")));
            }
        }
        let states: u64 = features.iter().map(|f| f.2 as u64).product();
        if states > u64::from(StateKey::MAX) {
            return Err(Error::Config("too many discrete states".into()));
        }
        Ok(Self { features: features.to_vec() })
    }

    pub fn state_count(&self) -> usize {
        self.features.iter().map(|f| f.2).product()
    }

    pub fn bin(&self, feature: usize, value: f64) -> usize {
        let (lo, hi, bins) = self.features[feature];
        if !(value > lo) {
            return 0;
        }
        (((value - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
    }

    /// Mixed-radix key, first feature most significant.
    pub fn key(&self, values: &[f64]) -> Result<StateKey> {
        if values.len() != self.features.len() {
            return Err(Error::Structural(format!(
                "discretizer expects {} features, got {}",
                self.features.len(),
                values.len()
            )));
        }
        let mut key = 0usize;
        for (i, &v) in values.iter().enumerate() {
            key = key * self.features[i].2 + self.bin(i, v);
        }
        Ok(key as StateKey)
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// With probability `1 - epsilon` the argmax, otherwise a uniform action.
pub fn epsilon_greedy(values: &[f64], epsilon: f64, stream: &mut RandomStream) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::Structural("epsilon_greedy over no actions".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if stream.uniform() < epsilon {
        Ok(stream.below(values.len()))
    } else {
        Ok(argmax(values))
    }
}

/// Sparse action-value table; missing entries read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    actions: usize,
    rows: BTreeMap<StateKey, Vec<f64>>,
}

impl QTable {
    pub fn new(actions: usize) -> Self {
        assert!(actions > 0, "QTable needs at least one action");
        Self { actions, rows: BTreeMap::new() }
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn visited_states(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, s: StateKey, a: usize) -> f64 {
        self.rows.get(&s).map_or(0.0, |r| r[a])
    }

    pub fn values(&self, s: StateKey) -> Vec<f64> {
        self.rows.get(&s).cloned().unwrap_or_else(|| vec![0.0; self.actions])
    }

    pub fn max_value(&self, s: StateKey) -> f64 {
        self.rows
            .get(&s)
            .map_or(0.0, |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn set(&mut self, s: StateKey, a: usize, v: f64) {
        let n = self.actions;
        self.rows.entry(s).or_insert_with(|| vec![0.0; n])[a] = v;
    }

    /// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_b Q(s', b))`.
    pub fn q_update(&mut self, s: StateKey, a: usize, reward: f64, s_next: StateKey, alpha: f64, gamma: f64) {
        debug_assert!(a < self.actions);
        let target = reward + gamma * self.max_value(s_next);
        let old = self.get(s, a);
        self.set(s, a, (1.0 - alpha) * old + alpha * target);
    }
}

/// Per-state mixed strategies; unvisited states are uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedPolicy {
    actions: usize,
    rows: BTreeMap<StateKey, Vec<f64>>,
}

impl MixedPolicy {
    pub fn new(actions: usize) -> Self {
        assert!(actions > 0, "MixedPolicy needs at least one action");
        Self { actions, rows: BTreeMap::new() }
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn probabilities(&self, s: StateKey) -> Vec<f64> {
        self.rows
            .get(&s)
            .cloned()
            .unwrap_or_else(|| vec![1.0 / self.actions as f64; self.actions])
    }

    pub fn set(&mut self, s: StateKey, probs: Vec<f64>) -> Result<()> {
        if probs.len() != self.actions {
            return Err(Error::Structural("policy row length mismatch".into()));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain("policy row is not a probability vector".into()));
        }
        self.rows.insert(s, probs);
        Ok(())
    }

    /// Inverse-CDF draw from the state's distribution.
    pub fn sample(&self, s: StateKey, stream: &mut RandomStream) -> usize {
        let u = stream.uniform();
        let probs = self.probabilities(s);
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding left u above the accumulated mass: last supported action.
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(self.actions - 1)
    }

    /// Policy hill climbing: move `delta` of probability onto the greedy
    /// action of `table` in state `s`, taking `delta / (A - 1)` from each
    /// other action (floored at zero), then renormalize.
    pub fn phc_update(&mut self, table: &QTable, s: StateKey, delta: f64) {
        let n = self.actions;
        let greedy = argmax(&table.values(s));
        let mut probs = self.probabilities(s);
        if n == 1 {
            return;
        }
        let share = delta / (n - 1) as f64;
        for (i, p) in probs.iter_mut().enumerate() {
            *p = if i == greedy { (*p + delta).min(1.0) } else { (*p - share).max(0.0) };
        }
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        self.rows.insert(s, probs);
    }
}

fn write_rows(out: &mut Vec<u8>, rows: &BTreeMap<StateKey, Vec<f64>>) {
    out.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    for (k, row) in rows {
        out.extend_from_slice(&k.to_le_bytes());
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_rows(r: &mut impl Read, actions: usize) -> Result<BTreeMap<StateKey, Vec<f64>>> {
    let n = read_u32(r)?;
    let mut rows = BTreeMap::new();
    let mut buf = vec![0u8; 8 * actions];
    for _ in 0..n {
        let key = read_u32(r)?;
        r.read_exact(&mut buf)?;
        let row: Vec<f64> = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite table entry".into()));
        }
        rows.insert(key, row);
    }
    Ok(rows)
}

/// Table plus optional policy, as persisted for hotbooting.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularArtifact {
    pub table: QTable,
    pub policy: Option<MixedPolicy>,
}

impl TabularArtifact {
    /// `UAVT`, version u16, action count u16, policy flag u8, then the
    /// Q rows and (if flagged) the policy rows, each as a u32 row count
    /// followed by `key u32, values f64 * A` little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(TABLE_MAGIC);
        out.extend_from_slice(&TABLE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.table.actions as u16).to_le_bytes());
        out.push(u8::from(self.policy.is_some()));
        write_rows(&mut out, &self.table.rows);
        if let Some(p) = &self.policy {
            write_rows(&mut out, &p.rows);
        }
        out
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut header = [0u8; 9];
        r.read_exact(&mut header)?;
        if &header[0..4] != TABLE_MAGIC {
            return Err(Error::Format("bad table magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != TABLE_VERSION {
            return Err(Error::Format(format!("unsupported table version {version}")));
        }
        let actions = u16::from_le_bytes([header[6], header[7]]) as usize;
        if actions == 0 || header[8] > 1 {
            return Err(Error::Format("bad table shape header".into()));
        }
        let table = QTable { actions, rows: read_rows(r, actions)? };
        let policy = if header[8] == 1 {
            let rows = read_rows(r, actions)?;
            for row in rows.values() {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Format("stored policy row off the simplex".into()));
                }
            }
            Some(MixedPolicy { actions, rows })
        } else {
            None
        };
        Ok(Self { table, policy })
    }

    pub fn digest(&self) -> u64 {
        crate::numerics::fnv1a64(&self.to_bytes())
    }
}

pub fn save_table(artifact: &TabularArtifact, path: &Path) -> Result<()> {
    atomic_write(path, &artifact.to_bytes())
}

pub fn load_table(path: &Path) -> Result<TabularArtifact> {
    TabularArtifact::read_from(&mut BufReader::new(File::open(path)?))
}
