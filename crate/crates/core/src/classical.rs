//! The classical iteration: attract to the Büchi states, take what is left as
//! a trap, remove the trap's player-2 attractor, repeat.

use crate::attractor::{attract_with, is_closed, AttractorRun, Degrees};
use crate::graph::{GameGraph, Player, StateId, SubgameView};
use crate::metrics::WorkMetrics;
use crate::set::StateSet;
use crate::solve::{Algorithm, IterationRecord, SolveResult, StepKind};

pub(crate) const PHASE_REACH: &str = "reach_buchi";
pub(crate) const PHASE_TRAP: &str = "trap_attractor";

/// Outcome of one classical iteration.
#[derive(Debug, Clone)]
pub struct AvoidSet {
    /// `alive \ Attr_1(B_i)`: player-1 closed and free of Büchi states.
    pub tr: StateSet,
    /// `Attr_2(tr)`.
    pub w_next: StateSet,
    pub w_choices: Vec<(StateId, StateId)>,
    pub reach_work: u64,
    pub trap_work: u64,
}

/// Resumable computation of the classical trap `alive \ Attr_1(b_i)`.
pub(crate) struct ClassicalTrRun<'d> {
    run: AttractorRun<'d>,
}

impl<'d> ClassicalTrRun<'d> {
    pub(crate) fn new(view: &SubgameView<'_>, b_i: &StateSet, degrees: Degrees<'d>) -> Self {
        let run =
            AttractorRun::new(view, Player::One, b_i, degrees).expect("Büchi targets are alive");
        ClassicalTrRun { run }
    }

    pub(crate) fn advance(&mut self, view: &SubgameView<'_>, budget: u64) -> bool {
        self.run.advance(view, budget)
    }

    pub(crate) fn work(&self) -> u64 {
        self.run.work()
    }

    pub(crate) fn trap(&self, view: &SubgameView<'_>) -> StateSet {
        let reach = self.run.set();
        StateSet::from_iter(
            view.graph().n(),
            view.alive().iter().filter(|&s| !reach.contains(s)),
        )
    }
}

/// One iteration of the classical algorithm on `view` with `b_i = B ∩ alive`.
pub fn avoid_set_classical(view: &SubgameView<'_>, b_i: &StateSet) -> AvoidSet {
    avoid_set_with(view, b_i, Degrees::Scan)
}

pub(crate) fn avoid_set_with(
    view: &SubgameView<'_>,
    b_i: &StateSet,
    degrees: Degrees<'_>,
) -> AvoidSet {
    let mut run = ClassicalTrRun::new(view, b_i, degrees);
    run.advance(view, u64::MAX);
    let tr = run.trap(view);
    debug_assert!(is_closed(view, Player::One, &tr));
    debug_assert!(tr.iter().all(|s| !view.graph().is_buchi(s)));
    let w = attract_with(view, Player::Two, &tr, degrees).expect("trap is alive");
    AvoidSet {
        w_choices: w.strategy_edges().collect(),
        w_next: w.set,
        tr,
        reach_work: run.work(),
        trap_work: w.work,
    }
}

/// Removes `w` from both the alive set and the live Büchi set.
pub(crate) fn remove_states(alive: &mut StateSet, b_alive: &mut StateSet, w: &StateSet) {
    for s in w.iter() {
        alive.remove(s);
        b_alive.remove(s);
    }
}

pub(crate) fn record(alive_before: usize, step: &AvoidSet, kind: StepKind) -> IterationRecord {
    IterationRecord {
        alive_before,
        tr: step.tr.to_sorted_vec(),
        w_next: step.w_next.to_sorted_vec(),
        w_choices: step.w_choices.clone(),
        step: kind,
    }
}

pub fn solve_classical(g: &GameGraph) -> SolveResult {
    let mut alive = g.full_view();
    let mut b_alive = g.buchi_set();
    let mut metrics = WorkMetrics::default();
    let mut trace = Vec::new();
    while !alive.is_empty() {
        let view = SubgameView::new(g, &alive);
        debug_assert!(crate::graph::validate_subgame(&view));
        let step = avoid_set_classical(&view, &b_alive);
        metrics.charge(PHASE_REACH, step.reach_work);
        metrics.charge(PHASE_TRAP, step.trap_work);
        trace.push(record(alive.len(), &step, StepKind::Classical));
        if step.w_next.is_empty() {
            break;
        }
        remove_states(&mut alive, &mut b_alive, &step.w_next);
    }
    SolveResult::from_parts(Algorithm::Classical, alive, trace, metrics)
}
