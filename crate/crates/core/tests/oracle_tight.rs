mod common;

use accessibility_core::separation::enumerate_tight;
use accessibility_core::VertexId;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn tight_counts_match_frozen_table() {
    let graphs = small_graphs();
    assert_eq!(graphs.len(), 996);
    for sg in &graphs {
        let g = handle(&sg.graph);
        let n = sg.graph.len();
        for v in 0..n {
            for k in 1..=3 {
                let got = enumerate_tight(&g, &VertexId::Int(v as i64), k, n).unwrap();
                assert_eq!(got.len(), sg.counts[3 * v + k - 1], "{:?} v={v} k={k}", sg.graph.edges());
                assert!(got.iter().all(|x| x.is_tight() && x.order() <= k));
            }
        }
    }
}

#[test]
fn tight_sets_match_brute_force_on_larger_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..24 {
        let n = 8 + round % 2;
        let g = random_connected(&mut rng, n, 0.2);
        let h = handle(&g);
        let brute: Vec<Sides> = all_separations(&g, 3).into_iter().filter(|s| brute_tight(&g, s)).collect();
        for v in 0..n as i64 {
            let v = VertexId::Int(v);
            for k in 1..=3 {
                let mut want: Vec<Sides> =
                    brute.iter().filter(|(a, b)| a.contains(&v) && b.contains(&v) && a.intersection(b).count() <= k).cloned().collect();
                want.sort();
                let mut got: Vec<Sides> = enumerate_tight(&h, &v, k, n).unwrap().iter().map(|x| x.sides().unwrap()).collect();
                got.sort();
                assert_eq!(got, want, "{:?} v={v} k={k}", g.edges());
            }
        }
    }
}
