//! Alternating reachability (attractors) and closed sets.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{Player, StateId, SubgameView};
use crate::set::StateSet;

const NONE: StateId = StateId::MAX;
const UNSET: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttractorError {
    #[error("target state {0} is not alive in the subgame")]
    TargetNotAlive(StateId),
}

/// Where opponent counters take their initial value from.
#[derive(Clone, Copy)]
pub enum Degrees<'d> {
    /// Count alive successors on first touch; each read is charged as work.
    Scan,
    /// Alive out-degrees maintained by the caller. Only valid when the view's
    /// alive set is the one the degrees were maintained for.
    Cached(&'d [u32]),
}

/// `Attr_player(target)` in a subgame, with ranks and rank-decreasing edges.
#[derive(Debug, Clone)]
pub struct AttractorResult {
    pub player: Player,
    pub set: StateSet,
    rank: Vec<u32>,
    strategy: Vec<StateId>,
    /// Adjacency entries read plus counter decrements.
    pub work: u64,
}

impl AttractorResult {
    /// Stage at which `s` entered the attractor; `None` for non-members.
    pub fn rank(&self, s: StateId) -> Option<u32> {
        (self.rank[s] != UNSET).then_some(self.rank[s])
    }

    /// Chosen successor for a rank>0 member owned by the attracting player.
    pub fn strategy_edge(&self, s: StateId) -> Option<StateId> {
        (self.strategy[s] != NONE).then_some(self.strategy[s])
    }

    pub fn strategy_edges(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.set
            .iter()
            .filter_map(|s| self.strategy_edge(s).map(|t| (s, t)))
    }
}

/// A resumable backward worklist computation of an attractor.
///
/// Opponent states carry a counter of alive successors not yet in the set;
/// they join when it reaches zero. States are processed in FIFO order, so the
/// rank assigned on entry is the least fixpoint stage. The strategy edge of a
/// player-owned state is the successor through which it was discovered, which
/// has rank exactly one less.
pub struct AttractorRun<'d> {
    player: Player,
    degrees: Degrees<'d>,
    set: StateSet,
    rank: Vec<u32>,
    strategy: Vec<StateId>,
    counter: Vec<u32>,
    queue: VecDeque<StateId>,
    cursor: Option<(StateId, usize)>,
    work: u64,
}

impl<'d> AttractorRun<'d> {
    pub fn new(
        view: &SubgameView<'_>,
        player: Player,
        target: &StateSet,
        degrees: Degrees<'d>,
    ) -> Result<Self, AttractorError> {
        let n = view.graph().n();
        let mut run = AttractorRun {
            player,
            degrees,
            set: StateSet::new(n),
            rank: vec![UNSET; n],
            strategy: vec![NONE; n],
            counter: vec![UNSET; n],
            queue: VecDeque::with_capacity(target.len()),
            cursor: None,
            work: 0,
        };
        for s in target.iter() {
            if !view.is_alive(s) {
                return Err(AttractorError::TargetNotAlive(s));
            }
            run.set.insert(s);
            run.rank[s] = 0;
            run.queue.push_back(s);
        }
        Ok(run)
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn set(&self) -> &StateSet {
        &self.set
    }

    /// Runs until done or until at least `budget` more units of work have
    /// been spent. Returns `true` once the fixpoint is reached.
    pub fn advance(&mut self, view: &SubgameView<'_>, budget: u64) -> bool {
        let graph = view.graph();
        let limit = self.work.saturating_add(budget);
        loop {
            let (v, mut idx) = match self.cursor.take() {
                Some(c) => c,
                None => match self.queue.pop_front() {
                    Some(v) => (v, 0),
                    None => return true,
                },
            };
            let preds = graph.predecessors(v);
            while idx < preds.len() {
                if self.work >= limit {
                    self.cursor = Some((v, idx));
                    return false;
                }
                let u = preds[idx];
                idx += 1;
                self.work += 1;
                if !view.is_alive(u) || self.set.contains(u) {
                    continue;
                }
                if graph.owner(u) == self.player {
                    self.admit(u, self.rank[v] + 1);
                    self.strategy[u] = v;
                } else {
                    if self.counter[u] == UNSET {
                        self.counter[u] = match self.degrees {
                            Degrees::Cached(d) => d[u],
                            Degrees::Scan => {
                                let succs = graph.successors(u);
                                self.work += succs.len() as u64;
                                succs.iter().filter(|&&t| view.is_alive(t)).count() as u32
                            }
                        };
                    }
                    self.counter[u] -= 1;
                    self.work += 1;
                    if self.counter[u] == 0 {
                        self.admit(u, self.rank[v] + 1);
                    }
                }
            }
        }
    }

    fn admit(&mut self, u: StateId, rank: u32) {
        self.set.insert(u);
        self.rank[u] = rank;
        self.queue.push_back(u);
    }

    pub fn finish(self) -> AttractorResult {
        debug_assert!(self.queue.is_empty() && self.cursor.is_none());
        AttractorResult {
            player: self.player,
            set: self.set,
            rank: self.rank,
            strategy: self.strategy,
            work: self.work,
        }
    }
}

/// Computes `Attr_player(target)` in `view`, scanning for opponent degrees.
pub fn attract(
    view: &SubgameView<'_>,
    player: Player,
    target: &StateSet,
) -> Result<AttractorResult, AttractorError> {
    attract_with(view, player, target, Degrees::Scan)
}

pub fn attract_with(
    view: &SubgameView<'_>,
    player: Player,
    target: &StateSet,
    degrees: Degrees<'_>,
) -> Result<AttractorResult, AttractorError> {
    let mut run = AttractorRun::new(view, player, target, degrees)?;
    run.advance(view, u64::MAX);
    Ok(run.finish())
}

/// Whether `u` is closed for `player`: the player's states in `u` have all
/// alive successors in `u`, the opponent's states have at least one.
pub fn is_closed(view: &SubgameView<'_>, player: Player, u: &StateSet) -> bool {
    let g = view.graph();
    u.iter().all(|s| {
        if g.owner(s) == player {
            view.successors(s).all(|t| u.contains(t))
        } else {
            view.successors(s).any(|t| u.contains(t))
        }
    })
}
