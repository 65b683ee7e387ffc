use buchi_core::attractor::{attract, is_closed};
use buchi_core::generators::{gen_random_bounded, Family, GenSpec};
use buchi_core::graph::validate_subgame;
use buchi_core::{parse_game, serialize_game, GameGraph, Player, StateSet, SubgameView};
use proptest::prelude::*;

fn graph(n: usize, d: usize, density: f64, seed: u64) -> GameGraph {
    let spec = GenSpec {
        d: d.min(n),
        seed,
        buchi_density: density,
        ..GenSpec::new(Family::RandomBounded, n)
    };
    gen_random_bounded(&spec).unwrap()
}

fn arb_game() -> impl Strategy<Value = GameGraph> {
    (1usize..40, 1usize..5, 0.0f64..=1.0, any::<u64>()).prop_map(|(n, d, p, s)| graph(n, d, p, s))
}

fn subset(n: usize, bits: &[bool]) -> StateSet {
    StateSet::from_iter(n, (0..n).filter(|&s| bits[s % bits.len()]))
}

/// Stage-by-stage attractor straight from the inductive definition.
fn naive_attractor(view: &SubgameView<'_>, player: Player, target: &StateSet) -> Vec<Option<u32>> {
    let g = view.graph();
    let mut rank = vec![None; g.n()];
    for s in target.iter() {
        rank[s] = Some(0);
    }
    let mut stage = 0;
    loop {
        stage += 1;
        let inside = |s: usize, rank: &Vec<Option<u32>>| rank[s].is_some_and(|r| r < stage);
        let fresh: Vec<usize> = view
            .alive()
            .iter()
            .filter(|&s| rank[s].is_none())
            .filter(|&s| {
                if g.owner(s) == player {
                    view.successors(s).any(|t| inside(t, &rank))
                } else {
                    view.successors(s).all(|t| inside(t, &rank))
                }
            })
            .collect();
        if fresh.is_empty() {
            return rank;
        }
        for s in fresh {
            rank[s] = Some(stage);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn attractor_matches_reference(g in arb_game(), bits in prop::collection::vec(any::<bool>(), 1..8), p2 in any::<bool>()) {
        let player = if p2 { Player::Two } else { Player::One };
        let alive = StateSet::full(g.n());
        let view = SubgameView::new(&g, &alive);
        let target = subset(g.n(), &bits);
        let attr = attract(&view, player, &target).unwrap();
        let reference = naive_attractor(&view, player, &target);
        for s in g.states() {
            prop_assert_eq!(attr.rank(s), reference[s]);
        }
    }

    #[test]
    fn complement_is_closed_for_the_attracting_player(g in arb_game(), bits in prop::collection::vec(any::<bool>(), 1..8)) {
        let alive = StateSet::full(g.n());
        let view = SubgameView::new(&g, &alive);
        for player in [Player::One, Player::Two] {
            let attr = attract(&view, player, &subset(g.n(), &bits)).unwrap();
            let rest = alive.difference(&attr.set);
            prop_assert!(is_closed(&view, player, &rest));
        }
    }

    #[test]
    fn attractor_is_monotone(g in arb_game(), a in prop::collection::vec(any::<bool>(), 1..8), b in prop::collection::vec(any::<bool>(), 1..8)) {
        let alive = StateSet::full(g.n());
        let view = SubgameView::new(&g, &alive);
        let small = subset(g.n(), &a);
        let big = small.union(&subset(g.n(), &b));
        let x = attract(&view, Player::One, &small).unwrap();
        let y = attract(&view, Player::One, &big).unwrap();
        prop_assert!(x.set.is_subset(&y.set));
    }

    #[test]
    fn strategy_edges_decrease_rank(g in arb_game(), bits in prop::collection::vec(any::<bool>(), 1..8)) {
        // Run inside a nontrivial subgame: the complement of a player-2 attractor.
        let full = StateSet::full(g.n());
        let full_view = SubgameView::new(&g, &full);
        let cut = attract(&full_view, Player::Two, &subset(g.n(), &[bits[0]])).unwrap();
        let alive = full.difference(&cut.set);
        let view = SubgameView::new(&g, &alive);
        prop_assert!(validate_subgame(&view));
        let target = subset(g.n(), &bits).intersection(&alive);
        let attr = attract(&view, Player::One, &target).unwrap();
        for s in attr.set.iter() {
            let r = attr.rank(s).unwrap();
            if r == 0 {
                continue;
            }
            if g.owner(s) == Player::One {
                let t = attr.strategy_edge(s).unwrap();
                prop_assert!(g.successors(s).contains(&t));
                prop_assert_eq!(attr.rank(t), Some(r - 1));
            } else {
                prop_assert!(view.successors(s).all(|t| attr.rank(t).is_some_and(|q| q < r)));
            }
            // Following the strategy reaches the target within |set| steps.
            prop_assert!(r as usize <= attr.set.len());
        }
    }

    #[test]
    fn serialization_round_trips(g in arb_game()) {
        let bytes = serialize_game(&g);
        let back = parse_game(&bytes).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_game(&back), bytes);
    }
}

#[test]
fn fifty_state_round_trip() {
    let g = graph(50, 4, 0.3, 2024);
    assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
}
