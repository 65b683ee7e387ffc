//! Büchi game solving: three trap-peeling algorithms over a shared attractor
//! engine, memoryless strategy extraction and verification, a brute-force
//! oracle for tiny graphs, and seeded instance generators.

pub mod alternative;
pub mod attractor;
pub mod classical;
pub mod generators;
pub mod graph;
pub mod improved;
pub mod metrics;
pub mod oracle;
pub mod scc;
pub mod set;
pub mod solve;
pub mod strategy;

pub use attractor::{attract, is_closed, AttractorResult};
pub use generators::{generate, Family, GenSpec};
pub use graph::{
    parse_game, parse_game_str, serialize_game, GameGraph, Player, StateId, SubgameView,
};
pub use oracle::{oracle_solve, OracleVerdict};
pub use set::StateSet;
pub use solve::{solve, Algorithm, SolveResult};
pub use strategy::{
    extract_strategies, simulate_play, verify_player1, verify_player2, MemorylessStrategy,
};
