use std::collections::VecDeque;

use crate::agents::SequenceMatrix;
use crate::numerics::RandomStream;

/// One transition `(phi(k), x(k), u(k), phi(k+1))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Experience {
    pub seq: SequenceMatrix,
    pub action: usize,
    pub utility: f64,
    pub next_seq: SequenceMatrix,
}

/// Bounded FIFO memory pool.
#[derive(Clone, Debug)]
pub struct ReplayPool {
    items: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayPool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { items: VecDeque::with_capacity(capacity.min(4096)), capacity }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, evicting the oldest experience when full.
    pub fn push(&mut self, e: Experience) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(e);
    }

    pub fn oldest(&self) -> Option<&Experience> {
        self.items.front()
    }

    pub fn newest(&self) -> Option<&Experience> {
        self.items.back()
    }

    /// `m` uniform draws with replacement.
    pub fn sample(&self, m: usize, stream: &mut RandomStream) -> Vec<&Experience> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..m).map(|_| &self.items[stream.below(self.items.len())]).collect()
    }
}
