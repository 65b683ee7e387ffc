//! The alternative iteration, which finds the trap from the coBüchi side,
//! and its dovetailed combination with the classical iteration.
//!
//! Per iteration, with `C^i` the alive non-Büchi states:
//!
//! * `c1`: player-1 states of `C^i` whose alive successors all lie in `C^i`,
//! * `c2`: player-2 states of `C^i` with an alive successor in `C^i`,
//! * `X = Attr_2(c1 ∪ c2)`, `Z = X ∩ C^i`,
//! * `D`: states of `Z` from which player 1 leaves `Z` in one step, plus `X \ Z`,
//! * `L = Attr_1(D)` inside `X`, and the trap is `Z \ L`.
//!
//! `c1` is maintained through per-state counters of alive Büchi successors and
//! `c2` only ever shrinks, so both cost O(m) over a whole solve. Work inside an
//! iteration is confined to edges incident to `X`, apart from the final
//! player-2 attractor of the trap.

use crate::attractor::{attract_with, is_closed, AttractorResult, AttractorRun, Degrees};
use crate::classical::ClassicalTrRun;
use crate::graph::{GameGraph, Player, StateId, SubgameView};
use crate::metrics::WorkMetrics;
use crate::set::StateSet;
use crate::solve::{Algorithm, DovetailStats, IterationRecord, Side, SolveResult, StepKind};

pub(crate) const PHASE_INIT: &str = "init_counters";
pub(crate) const PHASE_MAINTAIN: &str = "maintain_counters";
pub(crate) const PHASE_X: &str = "candidate_attractor";
pub(crate) const PHASE_ZD: &str = "escape_scan";
pub(crate) const PHASE_L: &str = "escape_attractor";
pub(crate) const PHASE_W: &str = "trap_attractor";
pub(crate) const PHASE_DOVE_CLASSICAL: &str = "dovetail_classical_side";
pub(crate) const PHASE_DOVE_ALTERNATIVE: &str = "dovetail_alternative_side";

/// Slice length, in work units, for dovetailing.
pub const DOVETAIL_SLICE: u64 = 64;

/// Incrementally maintained state carried across alternative iterations.
#[derive(Debug, Clone)]
pub struct AltIterationState {
    alive: StateSet,
    b_alive: StateSet,
    c1: StateSet,
    c2: StateSet,
    /// For player-1 states: alive successors in B.
    b_edge_counter: Vec<u32>,
    /// Alive out-degree of every alive state.
    outdeg: Vec<u32>,
}

impl AltIterationState {
    /// Builds the counters in one pass over all edges; returns the work spent.
    pub fn new(g: &GameGraph) -> (AltIterationState, u64) {
        let n = g.n();
        let mut b_edge_counter = vec![0u32; n];
        let mut outdeg = vec![0u32; n];
        let mut c1 = StateSet::new(n);
        let mut c2 = StateSet::new(n);
        let mut work = 0;
        for s in g.states() {
            let succs = g.successors(s);
            work += succs.len() as u64;
            outdeg[s] = succs.len() as u32;
            let into_b = succs.iter().filter(|&&t| g.is_buchi(t)).count() as u32;
            if g.owner(s) == Player::One {
                b_edge_counter[s] = into_b;
            }
            if g.is_buchi(s) {
                continue;
            }
            match g.owner(s) {
                Player::One => {
                    if into_b == 0 {
                        c1.insert(s);
                    }
                }
                Player::Two => {
                    if (into_b as usize) < succs.len() {
                        c2.insert(s);
                    }
                }
            }
        }
        let state = AltIterationState {
            alive: g.full_view(),
            b_alive: g.buchi_set(),
            c1,
            c2,
            b_edge_counter,
            outdeg,
        };
        (state, work)
    }

    pub fn alive(&self) -> &StateSet {
        &self.alive
    }

    pub fn b_alive(&self) -> &StateSet {
        &self.b_alive
    }

    pub fn c1(&self) -> &StateSet {
        &self.c1
    }

    pub fn c2(&self) -> &StateSet {
        &self.c2
    }

    pub fn view<'a>(&'a self, g: &'a GameGraph) -> SubgameView<'a> {
        SubgameView::new(g, &self.alive)
    }

    pub(crate) fn outdeg(&self) -> &[u32] {
        &self.outdeg
    }

    /// Removes `w` from the subgame and updates every counter through the
    /// predecessor edges of removed states. Returns the work spent.
    pub fn remove(&mut self, g: &GameGraph, w: &StateSet) -> u64 {
        for s in w.iter() {
            self.alive.remove(s);
            self.b_alive.remove(s);
            self.c1.remove(s);
            self.c2.remove(s);
        }
        let mut work = 0;
        for v in w.iter() {
            for &u in g.predecessors(v) {
                work += 1;
                if !self.alive.contains(u) {
                    continue;
                }
                self.outdeg[u] -= 1;
                work += 1;
                if g.owner(u) == Player::One && g.is_buchi(v) {
                    self.b_edge_counter[u] -= 1;
                    work += 1;
                    if self.b_edge_counter[u] == 0 && !g.is_buchi(u) {
                        self.c1.insert(u);
                    }
                }
            }
        }
        work
    }

    /// Recomputes every maintained quantity from scratch and compares.
    pub fn is_consistent(&self, g: &GameGraph) -> bool {
        let view = self.view(g);
        let in_c = |t: StateId| !g.is_buchi(t);
        let mut c1 = StateSet::new(g.n());
        let mut c2 = StateSet::new(g.n());
        for s in self.alive.iter() {
            if self.outdeg[s] as usize != view.successors(s).count() {
                return false;
            }
            if g.is_buchi(s) != self.b_alive.contains(s) {
                return false;
            }
            if g.is_buchi(s) {
                continue;
            }
            match g.owner(s) {
                Player::One => {
                    let into_b = view.successors(s).filter(|&t| !in_c(t)).count() as u32;
                    if into_b != self.b_edge_counter[s] {
                        return false;
                    }
                    if into_b == 0 {
                        c1.insert(s);
                    }
                }
                Player::Two => {
                    if view.successors(s).any(in_c) {
                        c2.insert(s);
                    }
                }
            }
        }
        c1 == self.c1 && c2 == self.c2
    }
}

/// The sets of one alternative iteration.
#[derive(Debug, Clone)]
pub struct AltSets {
    pub c1: StateSet,
    pub c2: StateSet,
    pub x: StateSet,
    pub z: StateSet,
    pub d: StateSet,
    pub l: StateSet,
    pub tr_hat: StateSet,
}

#[derive(Debug, Clone)]
pub struct AltIteration {
    pub sets: AltSets,
    pub w_next: StateSet,
    pub w_choices: Vec<(StateId, StateId)>,
    pub x_work: u64,
    pub zd_work: u64,
    pub l_work: u64,
    pub w_work: u64,
}

enum Stage<'d> {
    Candidates {
        run: AttractorRun<'d>,
    },
    Escapes {
        x: AttractorResult,
        z: StateSet,
        d: StateSet,
        next: usize,
    },
    EscapeAttractor {
        x: AttractorResult,
        z: StateSet,
        d: StateSet,
        run: AttractorRun<'static>,
    },
    Done {
        x: AttractorResult,
        z: StateSet,
        d: StateSet,
        l: AttractorResult,
    },
}

/// Resumable computation of the alternative trap `Z \ L`.
pub(crate) struct AltTrRun<'d> {
    c1: StateSet,
    c2: StateSet,
    stage: Option<Stage<'d>>,
    x_work: u64,
    zd_work: u64,
    l_work: u64,
}

impl<'d> AltTrRun<'d> {
    pub(crate) fn new(g: &GameGraph, state: &'d AltIterationState) -> Self {
        let view = state.view(g);
        let target = state.c1.union(&state.c2);
        let run = AttractorRun::new(&view, Player::Two, &target, Degrees::Cached(state.outdeg()))
            .expect("candidates are alive");
        AltTrRun {
            c1: state.c1.clone(),
            c2: state.c2.clone(),
            stage: Some(Stage::Candidates { run }),
            x_work: 0,
            zd_work: 0,
            l_work: 0,
        }
    }

    pub(crate) fn work(&self) -> u64 {
        let live = match &self.stage {
            Some(Stage::Candidates { run }) => run.work(),
            Some(Stage::EscapeAttractor { run, .. }) => run.work(),
            _ => 0,
        };
        self.x_work + self.zd_work + self.l_work + live
    }

    /// Advances by roughly `budget` units. Returns `true` when finished.
    pub(crate) fn advance(&mut self, view: &SubgameView<'_>, budget: u64) -> bool {
        let g = view.graph();
        let start = self.work();
        let limit = start.saturating_add(budget);
        loop {
            let remaining = limit.saturating_sub(self.work());
            if remaining == 0 && !matches!(self.stage, Some(Stage::Done { .. })) {
                return false;
            }
            let stage = self.stage.take().expect("stage present");
            self.stage = Some(match stage {
                Stage::Candidates { mut run } => {
                    if !run.advance(view, remaining) {
                        self.stage = Some(Stage::Candidates { run });
                        return false;
                    }
                    self.x_work = run.work();
                    let x = run.finish();
                    let z = StateSet::from_iter(g.n(), x.set.iter().filter(|&s| !g.is_buchi(s)));
                    let mut d = StateSet::new(g.n());
                    for s in x.set.iter().filter(|&s| g.is_buchi(s)) {
                        d.insert(s);
                    }
                    Stage::Escapes { x, z, d, next: 0 }
                }
                Stage::Escapes {
                    x,
                    z,
                    mut d,
                    mut next,
                } => {
                    let members = z.as_slice();
                    while next < members.len() {
                        if self.work() >= limit {
                            break;
                        }
                        let s = members[next];
                        next += 1;
                        let mut inside = 0usize;
                        let mut outside = 0usize;
                        for &t in g.successors(s) {
                            self.zd_work += 1;
                            if !view.is_alive(t) {
                                continue;
                            }
                            if z.contains(t) {
                                inside += 1;
                            } else {
                                outside += 1;
                            }
                        }
                        let escapes = match g.owner(s) {
                            Player::One => outside > 0,
                            Player::Two => inside == 0,
                        };
                        if escapes {
                            d.insert(s);
                        }
                    }
                    if next < members.len() {
                        self.stage = Some(Stage::Escapes { x, z, d, next });
                        return false;
                    }
                    let within = view.restrict(&x.set);
                    let run = AttractorRun::new(&within, Player::One, &d, Degrees::Scan)
                        .expect("escapes lie in X");
                    Stage::EscapeAttractor { x, z, d, run }
                }
                Stage::EscapeAttractor { x, z, d, mut run } => {
                    let within = view.restrict(&x.set);
                    if !run.advance(&within, remaining) {
                        self.stage = Some(Stage::EscapeAttractor { x, z, d, run });
                        return false;
                    }
                    self.l_work = run.work();
                    let l = run.finish();
                    Stage::Done { x, z, d, l }
                }
                done @ Stage::Done { .. } => {
                    self.stage = Some(done);
                    return true;
                }
            });
        }
    }

    pub(crate) fn finish(self) -> (AltSets, u64, u64, u64) {
        let Some(Stage::Done { x, z, d, l }) = self.stage else {
            panic!("alternative trap computation not finished");
        };
        let tr_hat = z.difference(&l.set);
        let sets = AltSets {
            c1: self.c1,
            c2: self.c2,
            x: x.set,
            z,
            d,
            l: l.set,
            tr_hat,
        };
        (sets, self.x_work, self.zd_work, self.l_work)
    }
}

/// One alternative iteration on the subgame held by `state`.
pub fn alt_iteration(g: &GameGraph, state: &AltIterationState) -> AltIteration {
    debug_assert!(state.is_consistent(g));
    let view = state.view(g);
    let mut run = AltTrRun::new(g, state);
    let done = run.advance(&view, u64::MAX);
    debug_assert!(done);
    let (sets, x_work, zd_work, l_work) = run.finish();
    debug_assert!(is_closed(&view, Player::One, &sets.tr_hat));
    let w = attract_with(
        &view,
        Player::Two,
        &sets.tr_hat,
        Degrees::Cached(state.outdeg()),
    )
    .expect("trap is alive");
    AltIteration {
        w_choices: w.strategy_edges().collect(),
        w_next: w.set,
        w_work: w.work,
        sets,
        x_work,
        zd_work,
        l_work,
    }
}

pub fn solve_alternative(g: &GameGraph) -> SolveResult {
    let mut metrics = WorkMetrics::default();
    let (mut state, init) = AltIterationState::new(g);
    metrics.charge(PHASE_INIT, init);
    let mut trace = Vec::new();
    while !state.alive.is_empty() {
        let it = alt_iteration(g, &state);
        metrics.charge(PHASE_X, it.x_work);
        metrics.charge(PHASE_ZD, it.zd_work);
        metrics.charge(PHASE_L, it.l_work);
        metrics.charge(PHASE_W, it.w_work);
        trace.push(IterationRecord {
            alive_before: state.alive.len(),
            tr: it.sets.tr_hat.to_sorted_vec(),
            w_next: it.w_next.to_sorted_vec(),
            w_choices: it.w_choices,
            step: StepKind::Alternative,
        });
        if it.w_next.is_empty() {
            break;
        }
        let work = state.remove(g, &it.w_next);
        metrics.charge(PHASE_MAINTAIN, work);
    }
    SolveResult::from_parts(Algorithm::Alternative, state.alive, trace, metrics)
}

/// Runs the classical and the alternative trap computations in alternating
/// slices of [`DOVETAIL_SLICE`] work units, alternative first, and adopts
/// whichever finishes first.
pub fn solve_dovetail(g: &GameGraph) -> SolveResult {
    let mut metrics = WorkMetrics::default();
    let mut stats = DovetailStats::default();
    let (mut state, init) = AltIterationState::new(g);
    metrics.charge(PHASE_INIT, init);
    let mut trace = Vec::new();
    while !state.alive.is_empty() {
        let view = state.view(g);
        let mut alt = AltTrRun::new(g, &state);
        let mut cls = ClassicalTrRun::new(&view, state.b_alive(), Degrees::Cached(state.outdeg()));
        let (side, tr) = loop {
            if alt.advance(&view, DOVETAIL_SLICE) {
                break (Side::Alternative, None);
            }
            if cls.advance(&view, DOVETAIL_SLICE) {
                break (Side::Classical, Some(cls.trap(&view)));
            }
        };
        metrics.charge(PHASE_DOVE_ALTERNATIVE, alt.work());
        metrics.charge(PHASE_DOVE_CLASSICAL, cls.work());
        let tr = match tr {
            Some(tr) => {
                stats.classical_wins += 1;
                tr
            }
            None => {
                stats.alternative_wins += 1;
                alt.finish().0.tr_hat
            }
        };
        let w = attract_with(&view, Player::Two, &tr, Degrees::Cached(state.outdeg()))
            .expect("trap is alive");
        metrics.charge(PHASE_W, w.work);
        trace.push(IterationRecord {
            alive_before: state.alive.len(),
            tr: tr.to_sorted_vec(),
            w_next: w.set.to_sorted_vec(),
            w_choices: w.strategy_edges().collect(),
            step: StepKind::Dovetail(side),
        });
        if w.set.is_empty() {
            break;
        }
        let work = state.remove(g, &w.set);
        metrics.charge(PHASE_MAINTAIN, work);
    }
    let mut res = SolveResult::from_parts(Algorithm::Dovetail, state.alive, trace, metrics);
    res.dovetail = Some(stats);
    res
}

/// Lockstep helper: classical and alternative trap for the same subgame.
pub fn lockstep_traps(
    g: &GameGraph,
    state: &AltIterationState,
) -> (crate::classical::AvoidSet, AltIteration) {
    let view = state.view(g);
    let classical = crate::classical::avoid_set_classical(&view, state.b_alive());
    (classical, alt_iteration(g, state))
}
