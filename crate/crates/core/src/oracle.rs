//! Brute-force winning regions for tiny graphs: every pair of memoryless
//! strategies is played out from every state.
//!
//! Nothing here touches attractor code. Enumerating only memoryless
//! strategies is complete because both objectives are memoryless determined;
//! the swapped-quantifier region is computed as a cross-check.

use thiserror::Error;

use crate::graph::{GameGraph, Player, StateId};
use crate::set::StateSet;
use crate::strategy::{simulate_play, MemorylessStrategy};

pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    /// `{s : ∃σ ∀π, play from s visits B infinitely often}`.
    pub w1: StateSet,
    pub w2: StateSet,
    /// `{s : ∀π ∃σ, ...}`; equal to `w1` by determinacy.
    pub w1_forall_exists: StateSet,
    pub strategy_pairs_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("strategy space has {product} pairs, above the cap of {cap}")]
    TooLarge { product: u128, cap: u128 },
}

/// Number of memoryless strategy pairs: the product of all out-degrees.
pub fn strategy_space(g: &GameGraph) -> u128 {
    g.states()
        .map(|s| g.successors(s).len() as u128)
        .fold(1u128, |acc, d| acc.saturating_mul(d))
}

/// Odometer over the adjacency indices of one player's states.
struct Odometer<'g> {
    g: &'g GameGraph,
    states: Vec<StateId>,
    digits: Vec<usize>,
    strat: MemorylessStrategy,
}

impl<'g> Odometer<'g> {
    fn new(g: &'g GameGraph, player: Player) -> Self {
        let states: Vec<StateId> = g.states_of(player).collect();
        let mut strat = MemorylessStrategy::new(player, g.n());
        for &s in &states {
            strat.set(s, g.successors(s)[0]);
        }
        Odometer {
            g,
            digits: vec![0; states.len()],
            states,
            strat,
        }
    }

    /// Steps to the next assignment; `false` after the last one.
    fn step(&mut self) -> bool {
        for (i, &s) in self.states.iter().enumerate() {
            let succs = self.g.successors(s);
            self.digits[i] += 1;
            if self.digits[i] < succs.len() {
                self.strat.set(s, succs[self.digits[i]]);
                return true;
            }
            self.digits[i] = 0;
            self.strat.set(s, succs[0]);
        }
        false
    }

    fn reset(&mut self) {
        for (i, &s) in self.states.iter().enumerate() {
            self.digits[i] = 0;
            self.strat.set(s, self.g.successors(s)[0]);
        }
    }
}

/// Per-state outcome of one strategy pair. Each start state is resolved by a
/// simulated lasso, and every state on that lasso shares its outcome, so the
/// number of simulations is at most the number of distinct lassos.
fn outcomes(
    g: &GameGraph,
    sigma: &MemorylessStrategy,
    pi: &MemorylessStrategy,
    out: &mut [Option<bool>],
) {
    out.fill(None);
    for s in g.states() {
        if out[s].is_some() {
            continue;
        }
        let play = simulate_play(g, s, sigma, pi).expect("odometer strategies are total");
        let win = play.visits_buchi_infinitely;
        for &t in play.prefix.iter().chain(&play.cycle) {
            if out[t].is_some() {
                break;
            }
            out[t] = Some(win);
        }
    }
}

/// Solves `g` by enumeration, refusing when the pair count exceeds `cap`.
pub fn oracle_solve(g: &GameGraph, cap: u128) -> Result<OracleVerdict, OracleError> {
    let product = strategy_space(g);
    if product > cap {
        return Err(OracleError::TooLarge { product, cap });
    }
    let n = g.n();
    let mut examined = 0u64;
    let mut out = vec![None; n];

    // ∃σ ∀π
    let mut w1 = vec![false; n];
    let mut sig = Odometer::new(g, Player::One);
    let mut pi = Odometer::new(g, Player::Two);
    loop {
        let mut all = vec![true; n];
        pi.reset();
        loop {
            examined += 1;
            outcomes(g, &sig.strat, &pi.strat, &mut out);
            for s in 0..n {
                all[s] &= out[s] == Some(true);
            }
            if all.iter().zip(&w1).all(|(&a, &w)| !a || w) || !pi.step() {
                break;
            }
        }
        for s in 0..n {
            w1[s] |= all[s];
        }
        if w1.iter().all(|&w| w) || !sig.step() {
            break;
        }
    }

    // ∀π ∃σ
    let mut fe = vec![true; n];
    pi.reset();
    loop {
        let mut any = vec![false; n];
        sig.reset();
        loop {
            examined += 1;
            outcomes(g, &sig.strat, &pi.strat, &mut out);
            for s in 0..n {
                any[s] |= out[s] == Some(true);
            }
            if any.iter().zip(&fe).all(|(&a, &f)| a || !f) || !sig.step() {
                break;
            }
        }
        for s in 0..n {
            fe[s] &= any[s];
        }
        if fe.iter().all(|&f| !f) || !pi.step() {
            break;
        }
    }

    let w1_set = StateSet::from_iter(n, (0..n).filter(|&s| w1[s]));
    Ok(OracleVerdict {
        w2: StateSet::from_iter(n, (0..n).filter(|&s| !w1[s])),
        w1: w1_set,
        w1_forall_exists: StateSet::from_iter(n, (0..n).filter(|&s| fe[s])),
        strategy_pairs_examined: examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_game_str;

    const H1: &str = "buchi 4\n0 1 0 0\n1 2 1 0,2\n2 1 0 2,1\n3 2 1 2\n";

    #[test]
    fn gadget_pair_is_lost_everywhere() {
        let g = parse_game_str(H1).unwrap();
        assert_eq!(strategy_space(&g), 4);
        let v = oracle_solve(&g, DEFAULT_CAP).unwrap();
        assert!(v.w1.is_empty());
        assert_eq!(v.w2.to_sorted_vec(), vec![0, 1, 2, 3]);
        assert_eq!(v.w1_forall_exists, v.w1);
    }

    #[test]
    fn all_buchi_is_won_everywhere() {
        let g = parse_game_str("buchi 3\n0 1 1 1,2\n1 2 1 2,0\n2 1 1 0\n").unwrap();
        let v = oracle_solve(&g, DEFAULT_CAP).unwrap();
        assert_eq!(v.w1.len(), 3);
        assert!(v.w2.is_empty());
    }

    #[test]
    fn single_cobuchi_self_loop() {
        let g = parse_game_str("buchi 1\n0 2 0 0\n").unwrap();
        let v = oracle_solve(&g, DEFAULT_CAP).unwrap();
        assert_eq!(v.w2.to_sorted_vec(), vec![0]);
    }

    #[test]
    fn player_one_choice_matters() {
        // 0 (p1) picks between a Büchi loop at 1 and a plain loop at 2.
        let g = parse_game_str("buchi 3\n0 1 0 1,2\n1 1 1 1\n2 2 0 2\n").unwrap();
        let v = oracle_solve(&g, DEFAULT_CAP).unwrap();
        assert_eq!(v.w1.to_sorted_vec(), vec![0, 1]);
        assert_eq!(v.w1_forall_exists, v.w1);
    }

    #[test]
    fn refuses_above_cap() {
        let g = parse_game_str("buchi 2\n0 1 0 0,1\n1 2 0 0,1\n").unwrap();
        assert_eq!(
            oracle_solve(&g, 3),
            Err(OracleError::TooLarge { product: 4, cap: 3 })
        );
    }
}
