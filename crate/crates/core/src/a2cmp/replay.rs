use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::{actions::ACTION_COUNT, rng, sim::Classification, Error, Result};

/// One step tuple: state, taken action and the value target fixed at commit
/// time.
#[derive(Clone, Debug, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action_label: usize,
    pub value_target: f64,
    /// How the episode this step belongs to ended.
    pub outcome: Classification,
}

/// Bounded FIFO of experiences from qualified episodes only.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayMemory {
    records: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("memory capacity must be positive".into()));
        }
        Ok(Self {
            records: VecDeque::new(),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Experience> {
        self.records.get(index)
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.records.iter()
    }

    /// Commits an episode's staged experiences if `outcome` qualifies,
    /// evicting the oldest records beyond capacity. Returns whether the
    /// episode was admitted.
    pub fn commit_episode(&mut self, staged: Vec<Experience>, outcome: Classification) -> Result<bool> {
        if !outcome.is_qualified() {
            return Ok(false);
        }
        for exp in &staged {
            if exp.action_label >= ACTION_COUNT {
                return Err(Error::InvalidConfig("action label out of range".into()));
            }
            if !exp.value_target.is_finite() {
                return Err(Error::InvalidConfig("non-finite value target".into()));
            }
        }
        for mut exp in staged {
            exp.outcome = outcome;
            if self.records.len() == self.capacity {
                self.records.pop_front();
            }
            self.records.push_back(exp);
        }
        debug_assert!(self.records.iter().all(|e| e.outcome.is_qualified()));
        Ok(true)
    }

    /// `count` records, without replacement when enough exist.
    pub fn sample(&self, rng: &mut rng::Rng, count: usize) -> Vec<&Experience> {
        rng::sample_indices(rng, self.records.len(), count)
            .into_iter()
            .map(|i| &self.records[i])
            .collect()
    }
}
