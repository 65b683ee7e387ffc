//! The improved solver: a cheap budgeted forward search from the states that
//! just lost an edge, looking for a small trap, with a classical iteration as
//! fallback.
//!
//! Logarithms are base 2 over `max(n, 2)`. The search budget is
//! `⌈2m / log n⌉` edge traversals and the classical branch is taken outright
//! when at least `⌈m / log n⌉` states have an edge into the last removed set.
//! Both use the edge count of the input graph throughout.

use std::collections::VecDeque;

use crate::attractor::{attract, Degrees};
use crate::classical::{avoid_set_with, record, remove_states, AvoidSet};
use crate::graph::{GameGraph, Player, StateId, SubgameView};
use crate::metrics::WorkMetrics;
use crate::set::StateSet;
use crate::solve::{
    Algorithm, ImprovedStats, IterationRecord, ProbeSummary, SolveResult, StepKind,
};

const PHASE_SOURCES: &str = "sources";
const PHASE_THRESHOLD_REACH: &str = "threshold_reach_buchi";
const PHASE_THRESHOLD_TRAP: &str = "threshold_trap_attractor";
const PHASE_PROBE_BFS: &str = "probe_search";
const PHASE_PROBE_ATTR: &str = "probe_attractor";
const PHASE_PROBE_TRAP: &str = "probe_trap_attractor";
const PHASE_FALLBACK_REACH: &str = "fallback_reach_buchi";
const PHASE_FALLBACK_TRAP: &str = "fallback_trap_attractor";

const UNSEEN: u32 = u32::MAX;

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// `⌈2m / log₂ n⌉`.
pub fn probe_budget(n: usize, m: usize) -> u64 {
    (2.0 * m as f64 / log2n(n)).ceil() as u64
}

/// `⌈m / log₂ n⌉`.
pub fn source_threshold(n: usize, m: usize) -> u64 {
    (m as f64 / log2n(n)).ceil() as u64
}

/// Alive states with an edge into `u`, found by scanning predecessors of `u`.
pub fn source_set(g: &GameGraph, u: &StateSet, alive: &StateSet) -> StateSet {
    source_set_counted(g, u.iter(), alive).0
}

fn source_set_counted(
    g: &GameGraph,
    u: impl Iterator<Item = StateId>,
    alive: &StateSet,
) -> (StateSet, u64) {
    let mut out = StateSet::new(g.n());
    let mut work = 0;
    for v in u {
        for &p in g.predecessors(v) {
            work += 1;
            if alive.contains(p) {
                out.insert(p);
            }
        }
    }
    (out, work)
}

/// Result of a budgeted breadth-first search from an auxiliary root whose
/// edges lead to every source. The root itself is never materialized.
#[derive(Debug, Clone)]
pub struct ForwardProbe {
    pub sources: StateSet,
    pub budget: u64,
    /// Explored states.
    pub r: StateSet,
    /// Discovered but not fully expanded when the search stopped.
    pub f: StateSet,
    depth: Vec<u32>,
    pub steps_used: u64,
    pub work: u64,
    /// Shallowest frontier depth; one past the deepest explored state when
    /// the frontier is empty; 0 when nothing was explored.
    pub realized_depth: u32,
}

impl ForwardProbe {
    /// BFS depth of an explored state (sources have depth 1).
    pub fn depth(&self, s: StateId) -> Option<u32> {
        (self.depth[s] != UNSEEN).then_some(self.depth[s])
    }

    fn summary(&self) -> ProbeSummary {
        ProbeSummary {
            sources: self.sources.len(),
            budget: self.budget,
            steps_used: self.steps_used,
            explored: self.r.to_sorted_vec(),
            frontier: self.f.len(),
            depth: self.realized_depth,
        }
    }
}

/// Breadth-first search over alive edges, one step per traversed alive edge
/// (including edges to states already seen), stopping after `budget` steps.
pub fn forward_probe(view: &SubgameView<'_>, sources: &StateSet, budget: u64) -> ForwardProbe {
    let g = view.graph();
    let n = g.n();
    let mut depth = vec![UNSEEN; n];
    let mut r = StateSet::new(n);
    let mut queue = VecDeque::with_capacity(sources.len());
    let mut work = 0;
    for s in sources.iter() {
        debug_assert!(view.is_alive(s));
        work += 1;
        r.insert(s);
        depth[s] = 1;
        queue.push_back(s);
    }
    let mut steps = 0;
    let mut f = StateSet::new(n);
    let mut halted_at = None;
    'bfs: while let Some(v) = queue.pop_front() {
        for &t in g.successors(v) {
            work += 1;
            if !view.is_alive(t) {
                continue;
            }
            if steps == budget {
                halted_at = Some(v);
                break 'bfs;
            }
            steps += 1;
            if r.insert(t) {
                depth[t] = depth[v] + 1;
                queue.push_back(t);
            }
        }
    }
    let realized_depth = match halted_at {
        Some(v) => {
            f.insert(v);
            f.extend(queue.iter().copied());
            depth[v]
        }
        None => r.iter().map(|s| depth[s]).max().map_or(0, |d| d + 1),
    };
    ForwardProbe {
        sources: sources.clone(),
        budget,
        r,
        f,
        depth,
        steps_used: steps,
        work,
        realized_depth,
    }
}

/// Trap detection inside an explored region.
#[derive(Debug, Clone)]
pub struct TrapProbe {
    /// Player-1 frontier states plus player-2 frontier states with no alive
    /// successor inside the explored region.
    pub t: StateSet,
    /// `Attr_1((r ∩ B) ∪ t)` within the explored region.
    pub a: StateSet,
    /// `r \ a`: player-1 closed in the whole subgame and free of Büchi states.
    pub tr: StateSet,
    pub work: u64,
}

pub fn trap_probe(view: &SubgameView<'_>, probe: &ForwardProbe, b: &StateSet) -> TrapProbe {
    let g = view.graph();
    let n = g.n();
    let mut work = 0;
    let mut t = StateSet::new(n);
    for s in probe.f.iter() {
        match g.owner(s) {
            Player::One => {
                t.insert(s);
            }
            Player::Two => {
                let mut inside = false;
                for &u in g.successors(s) {
                    work += 1;
                    if view.is_alive(u) && probe.r.contains(u) {
                        inside = true;
                        break;
                    }
                }
                if !inside {
                    t.insert(s);
                }
            }
        }
    }
    let mut target = t.clone();
    target.extend(probe.r.iter().filter(|&s| b.contains(s)));
    let within = view.restrict(&probe.r);
    let a = attract(&within, Player::One, &target).expect("targets lie in the explored region");
    work += a.work;
    let tr = probe.r.difference(&a.set);
    TrapProbe {
        t,
        a: a.set,
        tr,
        work,
    }
}

pub fn solve_improved(g: &GameGraph) -> SolveResult {
    let n = g.n();
    let m = g.m();
    let budget = probe_budget(n, m);
    let threshold = source_threshold(n, m);
    let mut stats = ImprovedStats::default();
    let mut metrics = WorkMetrics::default();
    let mut alive = g.full_view();
    let mut b_alive = g.buchi_set();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut last_removed: Vec<StateId> = Vec::new();

    while !alive.is_empty() {
        let view = SubgameView::new(g, &alive);
        let (sources, work) = source_set_counted(g, last_removed.iter().copied(), &alive);
        metrics.charge(PHASE_SOURCES, work);

        let alive_before = alive.len();
        let rec = if n < 2 || sources.len() as u64 >= threshold {
            stats.threshold_branch_count += 1;
            let step = avoid_set_with(&view, &b_alive, Degrees::Scan);
            metrics.charge(PHASE_THRESHOLD_REACH, step.reach_work);
            metrics.charge(PHASE_THRESHOLD_TRAP, step.trap_work);
            record(alive_before, &step, StepKind::Threshold)
        } else {
            let probe = forward_probe(&view, &sources, budget);
            metrics.charge(PHASE_PROBE_BFS, probe.work);
            let found = trap_probe(&view, &probe, &b_alive);
            metrics.charge(PHASE_PROBE_ATTR, found.work);
            stats.realized_depths.push(probe.realized_depth);
            if !found.tr.is_empty() {
                stats.probe_success_count += 1;
                let w = attract(&view, Player::Two, &found.tr).expect("trap is alive");
                metrics.charge(PHASE_PROBE_TRAP, w.work);
                let step = AvoidSet {
                    w_choices: w.strategy_edges().collect(),
                    w_next: w.set,
                    tr: found.tr,
                    reach_work: 0,
                    trap_work: 0,
                };
                record(alive_before, &step, StepKind::ProbeSuccess(probe.summary()))
            } else {
                stats.fallback_count += 1;
                let step = avoid_set_with(&view, &b_alive, Degrees::Scan);
                metrics.charge(PHASE_FALLBACK_REACH, step.reach_work);
                metrics.charge(PHASE_FALLBACK_TRAP, step.trap_work);
                if !step.w_next.is_empty() {
                    stats
                        .fallback_removals
                        .push((probe.realized_depth, step.w_next.len()));
                }
                record(alive_before, &step, StepKind::Fallback(probe.summary()))
            }
        };
        let done = rec.w_next.is_empty();
        last_removed = rec.w_next.clone();
        trace.push(rec);
        if done {
            break;
        }
        let w = StateSet::from_iter(n, last_removed.iter().copied());
        remove_states(&mut alive, &mut b_alive, &w);
    }
    let mut res = SolveResult::from_parts(Algorithm::Improved, alive, trace, metrics);
    res.improved = Some(stats);
    res
}
