//! Isomorphism testing for small finite graphs, optionally rooted.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::explore::Ball;
use crate::graph::FiniteGraph;
use crate::vertex::VertexId;

/// Dense adjacency view of a small graph with an optional distinguished vertex.
#[derive(Clone, Debug)]
pub struct Indexed {
    pub labels: Vec<VertexId>,
    pub adj: Vec<Vec<usize>>,
    pub root: Option<usize>,
}

impl Indexed {
    pub fn new(vertices: &[VertexId], edges: &[(VertexId, VertexId)], root: Option<&VertexId>) -> Self {
        let labels: Vec<VertexId> = vertices.to_vec();
        let index: BTreeMap<&VertexId, usize> = labels.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); labels.len()];
        for (u, v) in edges {
            let (a, b) = (index[u], index[v]);
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let root = root.map(|r| index[r]);
        Indexed { labels, adj, root }
    }

    pub fn from_ball(b: &Ball) -> Self {
        let root = (b.centers.len() == 1).then(|| b.centers.iter().next().unwrap());
        Indexed::new(&b.vertices, &b.edges, root)
    }

    pub fn from_graph(g: &FiniteGraph) -> Self {
        Indexed::new(g.vertex_list(), &g.edges(), None)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }
}

/// Colour refinement run jointly on both graphs so colours are comparable.
fn refine(g: &Indexed, h: &Indexed, seed_g: &[u64], seed_h: &[u64]) -> (Vec<usize>, Vec<usize>) {
    let mut cg: Vec<usize> = Vec::new();
    let mut ch: Vec<usize> = Vec::new();
    let mut keys: BTreeMap<(u64, Vec<usize>), usize> = BTreeMap::new();
    for (i, s) in seed_g.iter().enumerate() {
        let n = keys.len();
        cg.push(*keys.entry((*s, vec![g.adj[i].len()])).or_insert(n));
    }
    for (i, s) in seed_h.iter().enumerate() {
        let n = keys.len();
        ch.push(*keys.entry((*s, vec![h.adj[i].len()])).or_insert(n));
    }
    let mut classes = keys.len();
    loop {
        let mut keys: BTreeMap<(u64, Vec<usize>), usize> = BTreeMap::new();
        let mut step = |graph: &Indexed, col: &[usize]| -> Vec<usize> {
            (0..graph.len())
                .map(|i| {
                    let mut sig: Vec<usize> = graph.adj[i].iter().map(|&j| col[j]).collect();
                    sig.sort_unstable();
                    sig.insert(0, col[i]);
                    let n = keys.len();
                    *keys.entry((0, sig)).or_insert(n)
                })
                .collect()
        };
        let ng = step(g, &cg);
        let nh = step(h, &ch);
        let count = keys.len();
        cg = ng;
        ch = nh;
        if count == classes {
            return (cg, ch);
        }
        classes = count;
    }
}

/// An isomorphism `g → h` (mapping roots to roots when both are rooted), if any.
pub fn find_isomorphism(g: &Indexed, h: &Indexed) -> Option<Vec<usize>> {
    if g.len() != h.len() {
        return None;
    }
    let edges = |x: &Indexed| x.adj.iter().map(|l| l.len()).sum::<usize>();
    if edges(g) != edges(h) || g.root.is_some() != h.root.is_some() {
        return None;
    }
    let seed = |x: &Indexed| -> Vec<u64> { (0..x.len()).map(|i| u64::from(x.root == Some(i))).collect() };
    let (cg, ch) = refine(g, h, &seed(g), &seed(h));
    let mut hist_g = cg.clone();
    let mut hist_h = ch.clone();
    hist_g.sort_unstable();
    hist_h.sort_unstable();
    if hist_g != hist_h {
        return None;
    }
    // most constrained vertices first: rare colours, then BFS-ish order by degree
    let mut order: Vec<usize> = (0..g.len()).collect();
    let freq = |c: usize| cg.iter().filter(|&&x| x == c).count();
    order.sort_by_key(|&i| (freq(cg[i]), core::cmp::Reverse(g.adj[i].len()), i));
    let order = connected_order(g, &order);
    let mut map = vec![usize::MAX; g.len()];
    let mut used = vec![false; h.len()];
    if backtrack(g, h, &cg, &ch, &order, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// Reorders so that each vertex after the first of its component has an earlier neighbour.
fn connected_order(g: &Indexed, pref: &[usize]) -> Vec<usize> {
    let rank: Vec<usize> = {
        let mut r = vec![0; g.len()];
        for (k, &i) in pref.iter().enumerate() {
            r[i] = k;
        }
        r
    };
    let mut placed = vec![false; g.len()];
    let mut out = Vec::with_capacity(g.len());
    for &start in pref {
        if placed[start] {
            continue;
        }
        placed[start] = true;
        out.push(start);
        let mut k = out.len() - 1;
        while k < out.len() {
            let mut next: Vec<usize> = g.adj[out[k]].iter().copied().filter(|&j| !placed[j]).collect();
            next.sort_by_key(|&j| rank[j]);
            for j in next {
                placed[j] = true;
                out.push(j);
            }
            k += 1;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    g: &Indexed,
    h: &Indexed,
    cg: &[usize],
    ch: &[usize],
    order: &[usize],
    k: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if k == order.len() {
        return true;
    }
    let v = order[k];
    for w in 0..h.len() {
        if used[w] || ch[w] != cg[v] {
            continue;
        }
        let ok = order[..k].iter().all(|&u| g.adjacent(u, v) == h.adjacent(map[u], w));
        if !ok {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if backtrack(g, h, cg, ch, order, k + 1, map, used) {
            return true;
        }
        used[w] = false;
        map[v] = usize::MAX;
    }
    false
}

pub fn isomorphic(g: &Indexed, h: &Indexed) -> bool {
    find_isomorphism(g, h).is_some()
}

/// Rooted isomorphism of two balls (centre to centre when each has one centre).
pub fn balls_isomorphic(a: &Ball, b: &Ball) -> bool {
    isomorphic(&Indexed::from_ball(a), &Indexed::from_ball(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c6_is_not_two_triangles() {
        let c6 = FiniteGraph::cycle(6);
        let two = FiniteGraph::from_edges("2K3", 6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert!(!isomorphic(&Indexed::from_graph(&c6), &Indexed::from_graph(&two)));
        let relabelled = FiniteGraph::from_edges("C6'", 6, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 5), (5, 0)]).unwrap();
        assert!(isomorphic(&Indexed::from_graph(&c6), &Indexed::from_graph(&relabelled)));
    }

    #[test]
    fn rooted_path_respects_root() {
        let p = FiniteGraph::path(3);
        let mid = Indexed::new(p.vertex_list(), &p.edges(), Some(&VertexId::Int(1)));
        let end = Indexed::new(p.vertex_list(), &p.edges(), Some(&VertexId::Int(0)));
        assert!(!isomorphic(&mid, &end));
        assert!(isomorphic(&mid, &mid.clone()));
    }
}
