//! Solver-independent result types and dispatch.

use std::fmt;
use std::str::FromStr;

use crate::graph::{GameGraph, StateId};
use crate::metrics::WorkMetrics;
use crate::set::StateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Classical,
    Alternative,
    Improved,
    Dovetail,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Classical,
        Algorithm::Alternative,
        Algorithm::Improved,
        Algorithm::Dovetail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Classical => "classical",
            Algorithm::Alternative => "alternative",
            Algorithm::Improved => "improved",
            Algorithm::Dovetail => "dovetail",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Which dovetailed computation delivered the trap of an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Classical,
    Alternative,
}

/// Budgeted forward search summary for one iteration of the improved solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeSummary {
    pub sources: usize,
    pub budget: u64,
    pub steps_used: u64,
    /// Explored states, sorted.
    pub explored: Vec<StateId>,
    pub frontier: usize,
    /// Realized search depth: the shallowest frontier depth, or one past the
    /// deepest explored state when the search ran dry.
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    Classical,
    Alternative,
    Dovetail(Side),
    /// Improved solver, source count at or above the threshold.
    Threshold,
    ProbeSuccess(ProbeSummary),
    /// Improved solver, probe found nothing and a classical iteration ran.
    Fallback(ProbeSummary),
}

/// One iteration: the trap found in the current subgame and the player-2
/// attractor removed with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub alive_before: usize,
    pub tr: Vec<StateId>,
    pub w_next: Vec<StateId>,
    /// Rank-decreasing attractor edges of player-2 states in `w_next \ tr`.
    pub w_choices: Vec<(StateId, StateId)>,
    pub step: StepKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImprovedStats {
    pub threshold_branch_count: usize,
    pub probe_success_count: usize,
    pub fallback_count: usize,
    /// (realized depth, states removed) for every fallback that removed states.
    pub fallback_removals: Vec<(u32, usize)>,
    pub realized_depths: Vec<u32>,
}

impl ImprovedStats {
    pub fn min_states_removed_per_fallback(&self) -> Option<usize> {
        self.fallback_removals.iter().map(|&(_, k)| k).min()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DovetailStats {
    pub classical_wins: usize,
    pub alternative_wins: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    /// Player-2 (coBüchi) winning region.
    pub w2: StateSet,
    /// Player-1 (Büchi) winning region, the complement of `w2`.
    pub w1: StateSet,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub metrics: WorkMetrics,
    pub improved: Option<ImprovedStats>,
    pub dovetail: Option<DovetailStats>,
}

impl SolveResult {
    pub(crate) fn from_parts(
        algorithm: Algorithm,
        alive: StateSet,
        trace: Vec<IterationRecord>,
        mut metrics: WorkMetrics,
    ) -> SolveResult {
        let n = alive.universe();
        let w2 = StateSet::from_iter(n, (0..n).filter(|&s| !alive.contains(s)));
        metrics.iterations = trace.len();
        SolveResult {
            algorithm,
            w2,
            w1: alive,
            iterations: trace.len(),
            trace,
            metrics,
            improved: None,
            dovetail: None,
        }
    }
}

pub fn solve(g: &GameGraph, algorithm: Algorithm) -> SolveResult {
    match algorithm {
        Algorithm::Classical => crate::classical::solve_classical(g),
        Algorithm::Alternative => crate::alternative::solve_alternative(g),
        Algorithm::Improved => crate::improved::solve_improved(g),
        Algorithm::Dovetail => crate::alternative::solve_dovetail(g),
    }
}
