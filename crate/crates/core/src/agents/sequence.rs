use crate::agents::UavState;
use crate::error::{Error, Result};

/// Where the interleaved state/action history sits inside the square CNN
/// input: `s, a, s, a, ..., s`, oldest first, row-major, trailing zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequenceLayout {
    /// Number of states `E` in the window.
    pub history: usize,
    /// Matrix side `n1`.
    pub side: usize,
}

impl SequenceLayout {
    pub fn new(history: usize, side: usize) -> Result<Self> {
        let l = Self { history, side };
        if history == 0 || l.used_len() > side * side {
            return Err(Error::Config(format!(
                "history {history} needs {} cells, matrix has {}",
                l.used_len(),
                side * side
            )));
        }
        Ok(l)
    }

    /// `9 E + (E - 1)` scalars before padding.
    pub fn used_len(&self) -> usize {
        UavState::LEN * self.history + self.history.saturating_sub(1)
    }
}

/// Row-major `n1 x n1` network input.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceMatrix(pub Vec<f64>);

impl SequenceMatrix {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Lays out the most recent states and the actions between them. `states`
/// holds at most `E` entries, oldest first, and `actions` (normalized) the
/// `states.len() - 1` actions taken after all but the newest state. Missing
/// history during a cold start is left as zeros at the end.
pub fn build_sequence_matrix(layout: &SequenceLayout, states: &[UavState], actions: &[f64]) -> Result<SequenceMatrix> {
    if states.len() > layout.history {
        return Err(Error::Structural(format!("{} states exceed history {}", states.len(), layout.history)));
    }
    if actions.len() + 1 != states.len().max(1) {
        return Err(Error::Structural(format!(
            "{} states need {} actions, got {}",
            states.len(),
            states.len().saturating_sub(1),
            actions.len()
        )));
    }
    let mut m = vec![0.0; layout.side * layout.side];
    let mut at = 0;
    for (i, s) in states.iter().enumerate() {
        m[at..at + UavState::LEN].copy_from_slice(&s.to_array());
        at += UavState::LEN;
        if let Some(a) = actions.get(i) {
            m[at] = *a;
            at += 1;
        }
    }
    Ok(SequenceMatrix(m))
}
