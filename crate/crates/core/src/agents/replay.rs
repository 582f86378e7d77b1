use rand::seq::index;

use super::Transition;
use crate::seeding::SimRng;

/// Fixed-capacity FIFO experience replay.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    capacity: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { items: Vec::new(), capacity: capacity.max(1), inserted: 0 }
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

    /// Total number of pushes, including evicted transitions.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            let slot = (self.inserted % self.capacity as u64) as usize;
            self.items[slot] = t;
        }
        self.inserted += 1;
    }

    /// Uniform sample of `min(n, len)` distinct transitions.
    pub fn sample(&self, n: usize, rng: &mut SimRng) -> Vec<&Transition> {
        let k = n.min(self.items.len());
        index::sample(rng, self.items.len(), k).into_iter().map(|i| &self.items[i]).collect()
    }
}
