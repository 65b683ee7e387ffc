//! Memoryless strategies: extraction from solver traces, verification by
//! cycle analysis, and lasso simulation.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::attractor::attract;
use crate::graph::{GameGraph, Player, StateId, SubgameView};
use crate::scc;
use crate::set::StateSet;
use crate::solve::SolveResult;

const NONE: StateId = StateId::MAX;

/// A positional strategy for one player over a declared domain.
#[derive(Clone, PartialEq, Eq)]
pub struct MemorylessStrategy {
    pub player: Player,
    pub domain: StateSet,
    choice: Vec<StateId>,
}

impl MemorylessStrategy {
    pub fn new(player: Player, n: usize) -> Self {
        MemorylessStrategy {
            player,
            domain: StateSet::new(n),
            choice: vec![NONE; n],
        }
    }

    /// A uniformly random choice at every state of `player`.
    pub fn random<R: Rng + ?Sized>(g: &GameGraph, player: Player, rng: &mut R) -> Self {
        let mut strat = MemorylessStrategy::new(player, g.n());
        for s in g.states_of(player) {
            let succs = g.successors(s);
            strat.set(s, succs[rng.gen_range(0..succs.len())]);
        }
        strat
    }

    pub fn set(&mut self, s: StateId, t: StateId) {
        self.domain.insert(s);
        self.choice[s] = t;
    }

    pub fn choice(&self, s: StateId) -> Option<StateId> {
        (self.choice[s] != NONE).then_some(self.choice[s])
    }

    /// `(state, choice)` pairs sorted by state.
    pub fn choices(&self) -> Vec<(StateId, StateId)> {
        self.domain
            .to_sorted_vec()
            .into_iter()
            .map(|s| (s, self.choice[s]))
            .collect()
    }

    /// Checks ownership and that every choice is an edge of `g`.
    pub fn check_legal(&self, g: &GameGraph) -> Result<(), Violation> {
        if self.domain.universe() != g.n() {
            return Err(Violation::UniverseMismatch {
                strategy: self.domain.universe(),
                graph: g.n(),
            });
        }
        for (s, t) in self.choices() {
            if g.owner(s) != self.player {
                return Err(Violation::WrongOwner { state: s });
            }
            if !g.successors(s).contains(&t) {
                return Err(Violation::ChoiceNotSuccessor {
                    state: s,
                    choice: t,
                });
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for MemorylessStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MemorylessStrategy")
            .field("player", &self.player)
            .field("choices", &self.choices())
            .finish()
    }
}

/// Why a strategy fails to certify a winning region.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("strategy covers {strategy} states but the graph has {graph}")]
    UniverseMismatch { strategy: usize, graph: usize },
    #[error("state {state} is not owned by the strategy's player")]
    WrongOwner { state: StateId },
    #[error("no choice at state {state}")]
    MissingChoice { state: StateId },
    #[error("choice {choice} at state {state} is not a successor")]
    ChoiceNotSuccessor { state: StateId, choice: StateId },
    #[error("choice at state {state} leaves the region to {to}")]
    LeavesRegion { state: StateId, to: StateId },
    #[error("opponent state {state} can leave the region to {to}")]
    OpponentEscapes { state: StateId, to: StateId },
    #[error("forbidden cycle {0:?}")]
    ForbiddenCycle(Vec<StateId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionError {
    #[error("result covers {result} states but the graph has {graph}")]
    UniverseMismatch { result: usize, graph: usize },
    #[error("trace never removes state {0} although it is in w2")]
    MissingTraceData(StateId),
    #[error("player-2 state {0} in a trap has no successor inside the trap")]
    TrapNotClosed(StateId),
    #[error("state {0} in w1 cannot be attracted to the Büchi states of w1")]
    NotAttracted(StateId),
}

/// Extracts `(sigma1, pi2)` from a solve of `g`.
///
/// Inside a removed trap a player-2 state takes its first successor in the
/// trap; elsewhere in `w2` it follows the recorded attractor edge. In `w1`
/// player 1 follows the attractor to `B ∩ w1`, and on Büchi states takes the
/// first successor that stays in `w1`.
pub fn extract_strategies(
    g: &GameGraph,
    result: &SolveResult,
) -> Result<(MemorylessStrategy, MemorylessStrategy), ExtractionError> {
    let n = g.n();
    if result.w1.universe() != n || result.w2.universe() != n {
        return Err(ExtractionError::UniverseMismatch {
            result: result.w1.universe(),
            graph: n,
        });
    }

    let mut pi2 = MemorylessStrategy::new(Player::Two, n);
    for rec in &result.trace {
        let tr = StateSet::from_iter(n, rec.tr.iter().copied());
        for &s in &rec.tr {
            if g.owner(s) != Player::Two {
                continue;
            }
            let t = g
                .successors(s)
                .iter()
                .copied()
                .find(|&t| tr.contains(t))
                .ok_or(ExtractionError::TrapNotClosed(s))?;
            pi2.set(s, t);
        }
        for &(s, t) in &rec.w_choices {
            if g.owner(s) == Player::Two && !tr.contains(s) {
                pi2.set(s, t);
            }
        }
    }
    if let Some(s) = result
        .w2
        .iter()
        .find(|&s| g.owner(s) == Player::Two && pi2.choice(s).is_none())
    {
        return Err(ExtractionError::MissingTraceData(s));
    }

    let mut sigma1 = MemorylessStrategy::new(Player::One, n);
    let w1 = &result.w1;
    let view = SubgameView::new(g, w1);
    let b = StateSet::from_iter(n, w1.iter().filter(|&s| g.is_buchi(s)));
    let attr = attract(&view, Player::One, &b).expect("Büchi targets lie in w1");
    for s in w1.iter() {
        if g.owner(s) != Player::One {
            continue;
        }
        let t = if g.is_buchi(s) {
            view.successors(s).next()
        } else {
            attr.strategy_edge(s)
        };
        sigma1.set(s, t.ok_or(ExtractionError::NotAttracted(s))?);
    }
    Ok((sigma1, pi2))
}

/// Shared clauses (a) and (b): the strategy keeps its player inside
/// `region`, and the opponent cannot leave it.
fn check_region(
    g: &GameGraph,
    region: &StateSet,
    strat: &MemorylessStrategy,
) -> Result<(), Violation> {
    if region.universe() != g.n() || strat.domain.universe() != g.n() {
        return Err(Violation::UniverseMismatch {
            strategy: strat.domain.universe(),
            graph: g.n(),
        });
    }
    for s in region.to_sorted_vec() {
        if g.owner(s) == strat.player {
            let t = strat
                .choice(s)
                .ok_or(Violation::MissingChoice { state: s })?;
            if !g.successors(s).contains(&t) {
                return Err(Violation::ChoiceNotSuccessor {
                    state: s,
                    choice: t,
                });
            }
            if !region.contains(t) {
                return Err(Violation::LeavesRegion { state: s, to: t });
            }
        } else if let Some(&t) = g.successors(s).iter().find(|&&t| !region.contains(t)) {
            return Err(Violation::OpponentEscapes { state: s, to: t });
        }
    }
    Ok(())
}

/// The graph on `keep` where the strategy's player keeps only its choice.
fn restricted(
    g: &GameGraph,
    keep: &[StateId],
    strat: &MemorylessStrategy,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut local = vec![usize::MAX; g.n()];
    for (i, &s) in keep.iter().enumerate() {
        local[s] = i;
    }
    let adj = keep
        .iter()
        .map(|&s| {
            if g.owner(s) == strat.player {
                let t = strat.choice[s];
                if local[t] == usize::MAX {
                    vec![]
                } else {
                    vec![local[t]]
                }
            } else {
                g.successors(s)
                    .iter()
                    .filter(|&&t| local[t] != usize::MAX)
                    .map(|&t| local[t])
                    .collect()
            }
        })
        .collect();
    (adj, local)
}

/// Certifies that `pi2` wins the coBüchi objective from every state of `w2`:
/// plays stay in `w2` and every cycle they can form avoids `B`.
pub fn verify_player2(
    g: &GameGraph,
    w2: &StateSet,
    pi2: &MemorylessStrategy,
) -> Result<(), Violation> {
    check_region(g, w2, pi2)?;
    let keep = w2.to_sorted_vec();
    let (adj, _) = restricted(g, &keep, pi2);
    for comp in scc::tarjan(&adj) {
        if !scc::is_cyclic(&comp, &adj) {
            continue;
        }
        if let Some(&b) = comp.iter().find(|&&i| g.is_buchi(keep[i])) {
            let cycle = scc::cycle_through(b, &comp, &adj);
            return Err(Violation::ForbiddenCycle(scc::to_states(&cycle, &keep)));
        }
    }
    Ok(())
}

/// Certifies that `sigma1` wins the Büchi objective from every state of `w1`:
/// plays stay in `w1` and the part outside `B` is acyclic.
pub fn verify_player1(
    g: &GameGraph,
    w1: &StateSet,
    sigma1: &MemorylessStrategy,
) -> Result<(), Violation> {
    check_region(g, w1, sigma1)?;
    let keep: Vec<StateId> = w1
        .to_sorted_vec()
        .into_iter()
        .filter(|&s| !g.is_buchi(s))
        .collect();
    let (adj, _) = restricted(g, &keep, sigma1);
    for comp in scc::tarjan(&adj) {
        if scc::is_cyclic(&comp, &adj) {
            let cycle = scc::cycle_through(comp[0], &comp, &adj);
            return Err(Violation::ForbiddenCycle(scc::to_states(&cycle, &keep)));
        }
    }
    Ok(())
}

/// A play under two memoryless strategies in lasso form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayTrace {
    pub prefix: Vec<StateId>,
    pub cycle: Vec<StateId>,
    pub visits_buchi_infinitely: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlayError {
    #[error("no player-{player} choice at reached state {state}")]
    Undefined { state: StateId, player: Player },
    #[error("choice {choice} at state {state} is not a successor")]
    NotSuccessor { state: StateId, choice: StateId },
}

/// Plays from `s0`, player 1 following `sigma` and player 2 following `pi`,
/// until a state repeats.
pub fn simulate_play(
    g: &GameGraph,
    s0: StateId,
    sigma: &MemorylessStrategy,
    pi: &MemorylessStrategy,
) -> Result<PlayTrace, PlayError> {
    let mut seen = vec![usize::MAX; g.n()];
    let mut path = Vec::new();
    let mut s = s0;
    while seen[s] == usize::MAX {
        seen[s] = path.len();
        path.push(s);
        let player = g.owner(s);
        let strat = if player == Player::One { sigma } else { pi };
        let t = strat
            .choice(s)
            .ok_or(PlayError::Undefined { state: s, player })?;
        if !g.successors(s).contains(&t) {
            return Err(PlayError::NotSuccessor {
                state: s,
                choice: t,
            });
        }
        s = t;
    }
    let cycle = path.split_off(seen[s]);
    let visits_buchi_infinitely = cycle.iter().any(|&c| g.is_buchi(c));
    Ok(PlayTrace {
        prefix: path,
        cycle,
        visits_buchi_infinitely,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct StrategyParseError {
    pub line: usize,
    pub message: String,
}

/// Reads one or more `strategy <player>` blocks of `<state> <choice>` lines.
pub fn parse_strategies(
    text: &str,
    n: usize,
) -> Result<Vec<MemorylessStrategy>, StrategyParseError> {
    let mut out: Vec<MemorylessStrategy> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| StrategyParseError { line, message };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        if fields[0] == "strategy" {
            let player = match fields.get(1..) {
                Some(["1"]) => Player::One,
                Some(["2"]) => Player::Two,
                _ => return Err(err("expected `strategy 1` or `strategy 2`".into())),
            };
            out.push(MemorylessStrategy::new(player, n));
            continue;
        }
        let Some(cur) = out.last_mut() else {
            return Err(err("choice before any `strategy` header".into()));
        };
        let [s, t] = fields[..] else {
            return Err(err(format!(
                "expected `<state> <choice>`, found {} fields",
                fields.len()
            )));
        };
        let parse = |tok: &str| match tok.parse::<StateId>() {
            Ok(v) if v < n => Ok(v),
            _ => Err(err(format!("invalid state id `{tok}`"))),
        };
        let (s, t) = (parse(s)?, parse(t)?);
        if cur.domain.contains(s) {
            return Err(err(format!("state {s} chosen twice")));
        }
        cur.set(s, t);
    }
    Ok(out)
}

pub fn write_strategy(strat: &MemorylessStrategy) -> String {
    let mut out = format!("strategy {}\n", strat.player);
    for (s, t) in strat.choices() {
        let _ = writeln!(out, "{s} {t}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_game_str;
    use crate::solve::{solve, Algorithm};

    const H1: &str = "buchi 4\n0 1 0 0\n1 2 1 0,2\n2 1 0 2,1\n3 2 1 2\n";

    #[test]
    fn gadget_pair_strategies() {
        let g = parse_game_str(H1).unwrap();
        for alg in Algorithm::ALL {
            let res = solve(&g, alg);
            let (sigma1, pi2) = extract_strategies(&g, &res).unwrap();
            assert!(sigma1.domain.is_empty());
            assert_eq!(pi2.choices(), vec![(1, 0), (3, 2)]);
            verify_player2(&g, &res.w2, &pi2).unwrap();
            verify_player1(&g, &res.w1, &sigma1).unwrap();
        }
    }

    #[test]
    fn redirected_choice_leaves_region() {
        let g = parse_game_str(H1).unwrap();
        let mut pi2 = MemorylessStrategy::new(Player::Two, 4);
        pi2.set(1, 2);
        let w2 = StateSet::from_iter(4, [0, 1]);
        assert_eq!(
            verify_player2(&g, &w2, &pi2),
            Err(Violation::LeavesRegion { state: 1, to: 2 })
        );
    }

    #[test]
    fn buchi_cycle_is_caught() {
        // t -> w -> t with w in B: player 2 cannot avoid B.
        let g = parse_game_str("buchi 2\n0 1 0 1\n1 2 1 0\n").unwrap();
        let mut pi2 = MemorylessStrategy::new(Player::Two, 2);
        pi2.set(1, 0);
        assert_eq!(
            verify_player2(&g, &StateSet::full(2), &pi2),
            Err(Violation::ForbiddenCycle(vec![1, 0]))
        );
    }

    #[test]
    fn empty_regions_verify() {
        let g = parse_game_str(H1).unwrap();
        let s1 = MemorylessStrategy::new(Player::One, 4);
        verify_player1(&g, &StateSet::new(4), &s1).unwrap();
        let s2 = MemorylessStrategy::new(Player::Two, 4);
        verify_player2(&g, &StateSet::new(4), &s2).unwrap();
    }

    #[test]
    fn single_buchi_self_loop() {
        let g = parse_game_str("buchi 1\n0 1 1 0\n").unwrap();
        let mut sigma = MemorylessStrategy::new(Player::One, 1);
        sigma.set(0, 0);
        verify_player1(&g, &StateSet::full(1), &sigma).unwrap();
        let pi = MemorylessStrategy::new(Player::Two, 1);
        let play = simulate_play(&g, 0, &sigma, &pi).unwrap();
        assert!(play.prefix.is_empty());
        assert_eq!(play.cycle, vec![0]);
        assert!(play.visits_buchi_infinitely);
    }

    #[test]
    fn play_from_w1_of_gadget_pair() {
        let g = parse_game_str(H1).unwrap();
        let res = solve(&g, Algorithm::Classical);
        let (_, pi2) = extract_strategies(&g, &res).unwrap();
        let mut sigma = MemorylessStrategy::new(Player::One, 4);
        sigma.set(0, 0);
        sigma.set(2, 2);
        let play = simulate_play(&g, 3, &sigma, &pi2).unwrap();
        assert_eq!(play.prefix, vec![3]);
        assert_eq!(play.cycle, vec![2]);
        assert!(!play.visits_buchi_infinitely);
    }

    #[test]
    fn undefined_choice_is_reported() {
        let g = parse_game_str(H1).unwrap();
        let sigma = MemorylessStrategy::new(Player::One, 4);
        let pi = MemorylessStrategy::new(Player::Two, 4);
        assert_eq!(
            simulate_play(&g, 0, &sigma, &pi),
            Err(PlayError::Undefined {
                state: 0,
                player: Player::One
            })
        );
    }

    #[test]
    fn all_buchi_gives_total_sigma() {
        let g = parse_game_str("buchi 3\n0 1 1 1\n1 2 1 2,0\n2 1 1 0\n").unwrap();
        let res = solve(&g, Algorithm::Alternative);
        let (sigma1, pi2) = extract_strategies(&g, &res).unwrap();
        assert_eq!(sigma1.domain.len(), 2);
        assert!(pi2.domain.is_empty());
        verify_player1(&g, &res.w1, &sigma1).unwrap();
    }

    #[test]
    fn strategy_file_round_trip() {
        let mut s = MemorylessStrategy::new(Player::Two, 4);
        s.set(1, 0);
        s.set(3, 2);
        let text = write_strategy(&s);
        assert_eq!(text, "strategy 2\n1 0\n3 2\n");
        let parsed = parse_strategies(&text, 4).unwrap();
        assert_eq!(parsed, vec![s]);
        assert!(parse_strategies("0 1\n", 4).is_err());
        assert!(parse_strategies("strategy 3\n", 4).is_err());
        assert_eq!(
            parse_strategies("strategy 1\n0 9\n", 4).unwrap_err().line,
            2
        );
    }
}
