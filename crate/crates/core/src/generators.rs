//! Deterministic instance families.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GameGraph, Player, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    GadgetChain,
    GadgetChainCycles,
    RandomBounded,
    PlantedTrap,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::GadgetChain,
        Family::GadgetChainCycles,
        Family::RandomBounded,
        Family::PlantedTrap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::GadgetChain => "gadget_chain",
            Family::GadgetChainCycles => "gadget_chain_cycles",
            Family::RandomBounded => "random_bounded",
            Family::PlantedTrap => "planted_trap",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    /// Gadget count for the chains, state count otherwise.
    pub n: usize,
    /// Out-degree bound (random and planted families).
    pub d: usize,
    pub seed: u64,
    pub buchi_density: f64,
    /// Planted family only.
    pub trap_size: usize,
}

impl GenSpec {
    pub fn new(family: Family, n: usize) -> Self {
        GenSpec {
            family,
            n,
            d: 3,
            seed: 0,
            buchi_density: 0.5,
            trap_size: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("{family} needs n >= {min}, got {n}")]
    TooSmall {
        family: Family,
        min: usize,
        n: usize,
    },
    #[error("out-degree bound must satisfy 1 <= d <= n, got d={d}, n={n}")]
    BadDegree { d: usize, n: usize },
    #[error("buchi density must lie in [0, 1], got {0}")]
    BadDensity(f64),
    #[error("trap size must satisfy 1 <= k < n/4, got k={k}, n={n}")]
    BadTrapSize { k: usize, n: usize },
}

pub fn generate(spec: &GenSpec) -> Result<GameGraph, GenError> {
    match spec.family {
        Family::GadgetChain => gen_gadget_chain(spec.n),
        Family::GadgetChainCycles => gen_gadget_chain_cycles(spec.n),
        Family::RandomBounded => gen_random_bounded(spec),
        Family::PlantedTrap => gen_planted_trap(spec.n, spec.trap_size, spec.seed).map(|p| p.graph),
    }
}

fn build(owner: Vec<Player>, buchi: Vec<bool>, succ: Vec<Vec<StateId>>) -> GameGraph {
    GameGraph::new(owner, buchi, succ).expect("generator output is well formed")
}

/// Gadgets `H(0..=n)`: `t_i = 2i` (player 1), `w_i = 2i+1` (player 2, Büchi).
pub fn gen_gadget_chain(n: usize) -> Result<GameGraph, GenError> {
    if n < 1 {
        return Err(GenError::TooSmall {
            family: Family::GadgetChain,
            min: 1,
            n,
        });
    }
    let (owner, buchi, succ) = chain_parts(n);
    Ok(build(owner, buchi, succ))
}

fn chain_parts(n: usize) -> (Vec<Player>, Vec<bool>, Vec<Vec<StateId>>) {
    let t = |i: usize| 2 * i;
    let w = |i: usize| 2 * i + 1;
    let mut owner = Vec::with_capacity(2 * (n + 1));
    let mut buchi = Vec::with_capacity(2 * (n + 1));
    let mut succ = Vec::with_capacity(2 * (n + 1));
    for i in 0..=n {
        owner.push(Player::One);
        buchi.push(false);
        succ.push(if i == 0 {
            vec![t(0)]
        } else {
            vec![t(i), w(i - 1)]
        });
        owner.push(Player::Two);
        buchi.push(true);
        succ.push(if i == n {
            vec![t(n)]
        } else {
            vec![t(i), t(i + 1)]
        });
    }
    (owner, buchi, succ)
}

/// Fresh states per gadget loop in the cycle variant.
pub fn cycle_length(n: usize) -> usize {
    (2.0 * (n as f64).log2()).ceil() as usize
}

/// The gadget chain with each `t_i` self-loop replaced by a cycle
/// `t_i -> f_1 -> ... -> f_k -> t_i` of `k = cycle_length(n)` fresh
/// player-1 non-Büchi states. Like `t_i`, every fresh state of gadget `i > 0`
/// also has an edge to `w_{i-1}`, so the loop only becomes a trap once
/// `w_{i-1}` is gone. Fresh states follow the `2(n+1)` gadget ids, gadget by
/// gadget.
pub fn gen_gadget_chain_cycles(n: usize) -> Result<GameGraph, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall {
            family: Family::GadgetChainCycles,
            min: 2,
            n,
        });
    }
    let k = cycle_length(n);
    let (mut owner, mut buchi, mut succ) = chain_parts(n);
    for i in 0..=n {
        let t = 2 * i;
        let first = owner.len();
        let back: Option<StateId> = (i > 0).then(|| 2 * i - 1);
        succ[t][0] = first;
        for j in 0..k {
            let next = if j + 1 == k { t } else { first + j + 1 };
            owner.push(Player::One);
            buchi.push(false);
            succ.push(std::iter::once(next).chain(back).collect());
        }
    }
    Ok(build(owner, buchi, succ))
}

fn check_random(spec: &GenSpec) -> Result<(), GenError> {
    if spec.n < 1 {
        return Err(GenError::TooSmall {
            family: spec.family,
            min: 1,
            n: spec.n,
        });
    }
    if spec.d < 1 || spec.d > spec.n {
        return Err(GenError::BadDegree {
            d: spec.d,
            n: spec.n,
        });
    }
    if !(0.0..=1.0).contains(&spec.buchi_density) {
        return Err(GenError::BadDensity(spec.buchi_density));
    }
    Ok(())
}

/// Random owner by fair coin, Büchi flag by `buchi_density`, and between 1
/// and `d` distinct uniformly drawn successors per state.
pub fn gen_random_bounded(spec: &GenSpec) -> Result<GameGraph, GenError> {
    check_random(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut owner = Vec::with_capacity(spec.n);
    let mut buchi = Vec::with_capacity(spec.n);
    let mut succ = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (o, b, s) = random_state(&mut rng, spec.n, spec.d, spec.buchi_density);
        owner.push(o);
        buchi.push(b);
        succ.push(s);
    }
    Ok(build(owner, buchi, succ))
}

fn random_state<R: Rng>(
    rng: &mut R,
    n: usize,
    d: usize,
    density: f64,
) -> (Player, bool, Vec<StateId>) {
    let owner = if rng.gen_bool(0.5) {
        Player::One
    } else {
        Player::Two
    };
    let buchi = rng.gen_bool(density);
    let k = rng.gen_range(1..=d);
    let mut succ = sample(rng, n, k).into_vec();
    succ.sort_unstable();
    (owner, buchi, succ)
}

/// A random graph with a planted player-1 trap.
#[derive(Debug, Clone)]
pub struct PlantedTrap {
    pub graph: GameGraph,
    /// The trap, in cycle order.
    pub planted: Vec<StateId>,
    /// `[z, e]`: a losing sink `z` and the Büchi gate `e -> z`.
    pub gate: Vec<StateId>,
}

const PLANTED_DEGREE: usize = 3;
const PLANTED_DENSITY: f64 = 0.5;

/// Plants a cycle `P = p_0 -> ... -> p_{k-1} -> p_0` of player-1 non-Büchi
/// states at the top ids. `p_0` also has an edge to a player-2 Büchi gate
/// `e` whose only successor is a player-1 non-Büchi self-loop `z`. A
/// classical first iteration removes the gate, after which `P` is closed and
/// `p_0` is a source of the next iteration. The remaining states are random
/// with successors drawn from all ids.
pub fn gen_planted_trap(n: usize, trap_size: usize, seed: u64) -> Result<PlantedTrap, GenError> {
    if trap_size < 1 || 4 * trap_size >= n {
        return Err(GenError::BadTrapSize { k: trap_size, n });
    }
    let k = trap_size;
    let z = n - k - 2;
    let e = n - k - 1;
    let p0 = n - k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owner = Vec::with_capacity(n);
    let mut buchi = Vec::with_capacity(n);
    let mut succ = Vec::with_capacity(n);
    for _ in 0..z {
        let (o, b, s) = random_state(&mut rng, n, PLANTED_DEGREE.min(n), PLANTED_DENSITY);
        owner.push(o);
        buchi.push(b);
        succ.push(s);
    }
    owner.extend([Player::One, Player::Two]);
    buchi.extend([false, true]);
    succ.extend([vec![z], vec![z]]);
    for j in 0..k {
        owner.push(Player::One);
        buchi.push(false);
        let next = p0 + (j + 1) % k;
        // For k = 1 the cycle is p_0's self-loop.
        succ.push(if j == 0 { vec![next, e] } else { vec![next] });
    }
    Ok(PlantedTrap {
        graph: build(owner, buchi, succ),
        planted: (p0..n).collect(),
        gate: vec![z, e],
    })
}
