use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use accessibility_core::amalgam::construct_amalgam;
use accessibility_core::catalog;
use accessibility_core::explore::{ball_around, components_minus, Finiteness};
use accessibility_core::families;
use accessibility_core::{Graph, GraphHandle, VertexId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain BFS from `start` avoiding `s`, stopping after `depth` layers.
/// Returns the vertices seen and whether the last layer was nonempty.
fn escape(g: &dyn Graph, start: &VertexId, s: &BTreeSet<VertexId>, depth: usize) -> (BTreeSet<VertexId>, bool) {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start.clone(), 0)]);
    let mut reached = false;
    while let Some((v, d)) = queue.pop_front() {
        if d == depth {
            reached = true;
            continue;
        }
        for u in g.neighbors(&v).unwrap() {
            if !s.contains(&u) && seen.insert(u.clone()) {
                queue.push_back((u, d + 1));
            }
        }
    }
    (seen, reached)
}

fn graphs() -> Vec<GraphHandle> {
    let mut out: Vec<GraphHandle> =
        ["line", "grid2d", "ladder", "tree(3)"].iter().map(|n| families::by_name(n).unwrap().0).collect();
    for s in [catalog::double_ray(), catalog::star_leaves(), catalog::square_ladder(), catalog::star_edges()] {
        out.push(construct_amalgam(&s).unwrap().graph);
    }
    out
}

fn random_subset(rng: &mut impl Rng, pool: &[VertexId], max: usize) -> BTreeSet<VertexId> {
    let k = rng.gen_range(1..=max);
    (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn finiteness_verdicts_match_deep_exploration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in graphs() {
            let pool = ball_around(g.as_ref(), &g.root(), 2).unwrap().vertices;
            let s = random_subset(&mut rng, &pool, 3);
            let comps = components_minus(g.as_ref(), &s, 64).unwrap();
            let degree_sum: usize = s.iter().map(|v| g.neighbors(v).unwrap().len()).sum();
            prop_assert!(comps.len() <= degree_sum);
            for c in &comps {
                let (seen, reached) = escape(g.as_ref(), &c.seed, &s, 12);
                match c.verdict {
                    Finiteness::Finite(n) => {
                        prop_assert!(!reached, "{} {:?}", g.name(), s);
                        prop_assert_eq!(seen.len(), n);
                    }
                    Finiteness::Infinite => prop_assert!(reached, "{} {:?}", g.name(), s),
                    Finiteness::UnknownBeyond(_) => prop_assert!(false, "no hull for {}", g.name()),
                }
                for d in &comps {
                    if d.seed != c.seed {
                        prop_assert!(!seen.contains(&d.seed), "{}: components {} and {} meet", g.name(), c.seed, d.seed);
                    }
                }
            }
        }
    }
}

#[test]
fn balls_grow_monotonically() {
    for g in graphs() {
        for r in 0..4 {
            let small = ball_around(g.as_ref(), &g.root(), r).unwrap();
            let big = ball_around(g.as_ref(), &g.root(), r + 1).unwrap();
            let restricted: BTreeSet<VertexId> =
                big.vertices.iter().filter(|v| big.distance[*v] <= r).cloned().collect();
            assert_eq!(restricted, small.vertex_set(), "{}", g.name());
        }
    }
}

#[test]
fn classes_lie_in_the_parts_of_their_support() {
    let a = construct_amalgam(&catalog::star_edges()).unwrap();
    let g: Arc<dyn Graph> = a.graph.clone();
    for t in ball_around(a.tree.as_ref(), &a.tree.root(), 2).unwrap().vertices {
        for x in 0..4 {
            let class = a.class_of(&t, &VertexId::Int(x)).unwrap();
            let record = a.identification(&class).unwrap();
            for node in &record.support {
                let part = a.part(node).unwrap();
                assert!(part.contains(&class));
            }
            assert!(g.contains(&class));
        }
    }
}
