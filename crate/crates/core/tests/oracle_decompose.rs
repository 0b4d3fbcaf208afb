mod common;

use accessibility_core::separation::{decompose_into_tight, SeparationExpression};
use accessibility_core::FiniteGraph;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Default, Debug)]
struct Tally {
    separations: usize,
    tight_leaves: usize,
    neutral_leaves: usize,
    other_leaves: usize,
}

fn check_graph(g: &FiniteGraph, tally: &mut Tally) {
    let h = handle(g);
    for sides in all_separations(g, 3) {
        let x = separation(&h, &sides);
        let e: SeparationExpression = decompose_into_tight(&x).unwrap();
        assert_eq!(e.evaluate().unwrap(), x, "{:?} {x}", g.edges());
        for leaf in e.leaves() {
            assert!(leaf.order() <= x.order(), "{:?} {x}: leaf {leaf}", g.edges());
            if leaf.is_tight() {
                tally.tight_leaves += 1;
            } else if leaf.is_neutral() {
                tally.neutral_leaves += 1;
            } else {
                tally.other_leaves += 1;
            }
        }
        tally.separations += 1;
    }
}

#[test]
fn decompositions_round_trip_on_all_small_graphs() {
    let mut tally = Tally::default();
    for sg in small_graphs() {
        check_graph(&sg.graph, &mut tally);
    }
    assert!(tally.separations > 0);
}

#[test]
fn decompositions_round_trip_on_larger_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tally = Tally::default();
    for round in 0..10 {
        let g = random_connected(&mut rng, 8 + round % 2, 0.25);
        check_graph(&g, &mut tally);
    }
}
