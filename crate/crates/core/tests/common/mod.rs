#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use accessibility_core::separation::Separation;
use accessibility_core::{FiniteGraph, GraphHandle, VertexId};
use rand::Rng;

pub type Sides = (BTreeSet<VertexId>, BTreeSet<VertexId>);

/// A connected graph from the frozen table with tight-separation counts
/// `counts[3 * v + k - 1]` (separator contains `v`, order at most `k`).
pub struct SmallGraph {
    pub graph: FiniteGraph,
    pub counts: Vec<usize>,
}

pub fn small_graphs() -> Vec<SmallGraph> {
    include_str!("../data/connected_le7.txt")
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let mut fields = line.split(';');
            let n: usize = fields.next().unwrap().parse().unwrap();
            let edges: Vec<(i64, i64)> = fields
                .next()
                .unwrap()
                .split(',')
                .filter(|e| !e.is_empty())
                .map(|e| {
                    let (a, b) = e.split_once('-').unwrap();
                    (a.parse().unwrap(), b.parse().unwrap())
                })
                .collect();
            let counts = fields.next().unwrap().split(' ').map(|c| c.parse().unwrap()).collect();
            SmallGraph { graph: FiniteGraph::from_edges(format!("g{i}"), n, &edges).unwrap(), counts }
        })
        .collect()
}

/// Connected graph on `n` vertices: a random spanning tree plus edges with probability `p`.
pub fn random_connected(rng: &mut impl Rng, n: usize, p: f64) -> FiniteGraph {
    let mut edges = BTreeSet::new();
    for v in 1..n as i64 {
        edges.insert((rng.gen_range(0..v), v));
    }
    for u in 0..n as i64 {
        for v in u + 1..n as i64 {
            if rng.gen_bool(p) {
                edges.insert((u, v));
            }
        }
    }
    let edges: Vec<(i64, i64)> = edges.into_iter().collect();
    FiniteGraph::from_edges(format!("random{n}"), n, &edges).unwrap()
}

/// Every separation `(A, B)` of order at most `max_order`, by assigning each
/// vertex to `A ∖ B`, `B ∖ A` or `A ∩ B`.
pub fn all_separations(g: &FiniteGraph, max_order: usize) -> Vec<Sides> {
    let vs = g.vertex_list();
    let n = vs.len();
    let mut out = Vec::new();
    let mut code = vec![0u8; n];
    loop {
        let order = code.iter().filter(|&&c| c == 2).count();
        if order <= max_order {
            let ok = g.edges().iter().all(|(u, v)| {
                let (cu, cv) = (code[g.index_of(u).unwrap()], code[g.index_of(v).unwrap()]);
                !((cu == 0 && cv == 1) || (cu == 1 && cv == 0))
            });
            if ok {
                let a = (0..n).filter(|&i| code[i] != 1).map(|i| vs[i].clone()).collect();
                let b = (0..n).filter(|&i| code[i] != 0).map(|i| vs[i].clone()).collect();
                out.push((a, b));
            }
        }
        let mut i = 0;
        while i < n && code[i] == 2 {
            code[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        code[i] += 1;
    }
    out
}

/// Components of `g[keep]`.
fn components(g: &FiniteGraph, keep: &BTreeSet<VertexId>) -> Vec<BTreeSet<VertexId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in keep {
        if !seen.insert(v.clone()) {
            continue;
        }
        let mut comp = BTreeSet::from([v.clone()]);
        let mut stack = vec![v.clone()];
        while let Some(x) = stack.pop() {
            for y in g.neighbor_list(&x) {
                if keep.contains(y) && seen.insert(y.clone()) {
                    comp.insert(y.clone());
                    stack.push(y.clone());
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Direct check of tightness on explicit sides.
pub fn brute_tight(g: &FiniteGraph, (a, b): &Sides) -> bool {
    let s: BTreeSet<VertexId> = a.intersection(b).cloned().collect();
    if s.is_empty() {
        return false;
    }
    let full = |side: BTreeSet<VertexId>| {
        components(g, &side).iter().any(|c| {
            let nb: BTreeSet<VertexId> =
                c.iter().flat_map(|x| g.neighbor_list(x).iter().cloned()).filter(|y| !c.contains(y)).collect();
            nb == s
        })
    };
    full(a.difference(b).cloned().collect()) && full(b.difference(a).cloned().collect())
}

pub fn handle(g: &FiniteGraph) -> GraphHandle {
    Arc::new(g.clone())
}

pub fn separation(g: &GraphHandle, sides: &Sides) -> Separation {
    Separation::from_sets(g, &sides.0, &sides.1).unwrap()
}
