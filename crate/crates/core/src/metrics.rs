use std::collections::BTreeMap;

/// Work counters shared by all solvers.
///
/// One unit is one read of one adjacency entry or one counter decrement.
/// `edge_examinations` is always the sum of the per-phase breakdown.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkMetrics {
    pub edge_examinations: u64,
    pub iterations: usize,
    per_phase: BTreeMap<&'static str, u64>,
}

impl WorkMetrics {
    pub fn charge(&mut self, phase: &'static str, work: u64) {
        self.edge_examinations += work;
        *self.per_phase.entry(phase).or_insert(0) += work;
    }

    pub fn per_phase(&self) -> &BTreeMap<&'static str, u64> {
        &self.per_phase
    }

    pub fn phase(&self, phase: &str) -> u64 {
        self.per_phase.get(phase).copied().unwrap_or(0)
    }

    pub fn is_consistent(&self) -> bool {
        self.per_phase.values().sum::<u64>() == self.edge_examinations
    }
}
