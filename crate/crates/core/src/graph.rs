//! Neighbour-oracle graphs: finite graphs and the built-in lazy families.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::vertex::VertexId;

/// Exact finiteness data for a finite separator `S`.
///
/// `region` contains `S` and all its neighbours, every component of `G − S`
/// meets `region` in a connected set, and a component is infinite exactly
/// when it meets `frontier`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hull {
    pub region: BTreeSet<VertexId>,
    pub frontier: BTreeSet<VertexId>,
}

/// A locally finite graph given by a neighbour oracle.
///
/// Neighbour lists must be symmetric, loop-free and sorted. Implementations
/// are immutable after construction.
pub trait Graph: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn root(&self) -> VertexId;
    fn contains(&self, v: &VertexId) -> bool;
    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>>;
    fn degree_bound(&self) -> Option<usize>;

    /// All vertices, for finite graphs only.
    fn vertices(&self) -> Option<Vec<VertexId>> {
        None
    }

    /// Exact finiteness oracle for a nonempty finite separator, if the family has one.
    fn hull(&self, _s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        None
    }

    fn is_finite(&self) -> bool {
        self.vertices().is_some()
    }
}

pub type GraphHandle = Arc<dyn Graph>;

/// Identity of a graph handle (pointer identity of the shared oracle).
pub fn same_graph(a: &GraphHandle, b: &GraphHandle) -> bool {
    core::ptr::eq(
        Arc::as_ptr(a) as *const u8,
        Arc::as_ptr(b) as *const u8,
    )
}

pub(crate) fn check_vertex(g: &dyn Graph, v: &VertexId) -> Result<()> {
    if g.contains(v) {
        Ok(())
    } else {
        Err(Error::InvalidVertex(v.clone()))
    }
}

/// Finite simple undirected graph.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    name: String,
    vertices: Vec<VertexId>,
    adj: BTreeMap<VertexId, Vec<VertexId>>,
}

impl fmt::Debug for FiniteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGraph")
            .field("name", &self.name)
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl FiniteGraph {
    pub fn new(
        name: impl Into<String>,
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for v in vertices {
            adj.entry(v).or_default();
        }
        if adj.is_empty() {
            return Err(domain!("a graph needs at least one vertex"));
        }
        for (u, v) in edges {
            if u == v {
                return Err(domain!("self-loop at {u}"));
            }
            if !adj.contains_key(&u) {
                return Err(domain!("edge endpoint {u} is not a declared vertex"));
            }
            if !adj.contains_key(&v) {
                return Err(domain!("edge endpoint {v} is not a declared vertex"));
            }
            adj.get_mut(&u).unwrap().insert(v.clone());
            adj.get_mut(&v).unwrap().insert(u);
        }
        let vertices: Vec<VertexId> = adj.keys().cloned().collect();
        let adj = adj
            .into_iter()
            .map(|(k, s)| (k, s.into_iter().collect()))
            .collect();
        Ok(FiniteGraph { name: name.into(), vertices, adj })
    }

    /// Graph on `0..n` with integer vertex ids.
    pub fn from_edges(name: impl Into<String>, n: usize, edges: &[(i64, i64)]) -> Result<Self> {
        FiniteGraph::new(
            name,
            (0..n as i64).map(VertexId::Int),
            edges.iter().map(|&(u, v)| (VertexId::Int(u), VertexId::Int(v))),
        )
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(i64, i64)> = (1..n as i64).map(|i| (i - 1, i)).collect();
        FiniteGraph::from_edges(format!("P{n}"), n, &edges).expect("path is well formed")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        let mut edges: Vec<(i64, i64)> = (1..n as i64).map(|i| (i - 1, i)).collect();
        edges.push((n as i64 - 1, 0));
        FiniteGraph::from_edges(format!("C{n}"), n, &edges).expect("cycle is well formed")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n as i64 {
            for j in i + 1..n as i64 {
                edges.push((i, j));
            }
        }
        FiniteGraph::from_edges(format!("K{n}"), n, &edges).expect("complete graph is well formed")
    }

    /// Star `K_{1,n}` with centre 0 and leaves `1..=n`.
    pub fn star(n: usize) -> Self {
        let edges: Vec<(i64, i64)> = (1..=n as i64).map(|i| (0, i)).collect();
        FiniteGraph::from_edges(format!("K1,{n}"), n + 1, &edges).expect("star is well formed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn vertex_list(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }

    pub fn adjacent(&self, u: &VertexId, v: &VertexId) -> bool {
        self.adj.get(u).is_some_and(|n| n.binary_search(v).is_ok())
    }

    pub fn neighbor_list(&self, v: &VertexId) -> &[VertexId] {
        self.adj.get(v).map(|n| n.as_slice()).unwrap_or(&[])
    }

    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (u, ns) in &self.adj {
            for v in ns {
                if u < v {
                    out.push((u.clone(), v.clone()));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.vertices[0].clone()];
        seen.insert(self.vertices[0].clone());
        while let Some(v) = stack.pop() {
            for u in self.neighbor_list(&v) {
                if seen.insert(u.clone()) {
                    stack.push(u.clone());
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Subgraph induced by `keep`.
    pub fn induced(&self, name: impl Into<String>, keep: &BTreeSet<VertexId>) -> Result<Self> {
        let edges = self
            .edges()
            .into_iter()
            .filter(|(u, v)| keep.contains(u) && keep.contains(v));
        FiniteGraph::new(name, keep.iter().cloned(), edges)
    }

    /// Whether `map` (total on the vertices) is an automorphism.
    pub fn is_automorphism(&self, map: &BTreeMap<VertexId, VertexId>) -> bool {
        if map.len() != self.vertices.len() {
            return false;
        }
        let image: BTreeSet<&VertexId> = map.values().collect();
        if image.len() != self.vertices.len() || !image.iter().all(|v| self.adj.contains_key(*v)) {
            return false;
        }
        self.edges().iter().all(|(u, v)| match (map.get(u), map.get(v)) {
            (Some(a), Some(b)) => self.adjacent(a, b),
            _ => false,
        })
    }
}

impl Graph for FiniteGraph {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn root(&self) -> VertexId {
        self.vertices[0].clone()
    }

    fn contains(&self, v: &VertexId) -> bool {
        self.adj.contains_key(v)
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        self.adj.get(v).cloned().ok_or_else(|| Error::InvalidVertex(v.clone()))
    }

    fn degree_bound(&self) -> Option<usize> {
        self.adj.values().map(|n| n.len()).max()
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        Some(self.vertices.clone())
    }

    fn hull(&self, _s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        Some(Ok(Hull { region: self.vertices.iter().cloned().collect(), frontier: BTreeSet::new() }))
    }
}

fn ints(s: &BTreeSet<VertexId>) -> Result<Vec<i64>> {
    s.iter().map(|v| v.int().ok_or_else(|| Error::InvalidVertex(v.clone()))).collect()
}

/// The double ray on the integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct LineGraph;

impl Graph for LineGraph {
    fn name(&self) -> String {
        "line".into()
    }

    fn root(&self) -> VertexId {
        VertexId::Int(0)
    }

    fn contains(&self, v: &VertexId) -> bool {
        matches!(v, VertexId::Int(_))
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let i = v.int().ok_or_else(|| Error::InvalidVertex(v.clone()))?;
        Ok(vec![VertexId::Int(i - 1), VertexId::Int(i + 1)])
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(2)
    }

    // A component escaping the interval hull of S contains a ray.
    fn hull(&self, s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        Some(ints(s).map(|xs| {
            let lo = xs.iter().min().unwrap() - 1;
            let hi = xs.iter().max().unwrap() + 1;
            Hull {
                region: (lo..=hi).map(VertexId::Int).collect(),
                frontier: [VertexId::Int(lo), VertexId::Int(hi)].into_iter().collect(),
            }
        }))
    }
}

fn pairs(s: &BTreeSet<VertexId>) -> Result<Vec<(i64, i64)>> {
    s.iter()
        .map(|v| match v {
            VertexId::Pair(x, y) => Ok((*x, *y)),
            _ => Err(Error::InvalidVertex(v.clone())),
        })
        .collect()
}

/// The square grid `Z²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Grid2d;

impl Graph for Grid2d {
    fn name(&self) -> String {
        "grid2d".into()
    }

    fn root(&self) -> VertexId {
        VertexId::Pair(0, 0)
    }

    fn contains(&self, v: &VertexId) -> bool {
        matches!(v, VertexId::Pair(_, _))
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        match v {
            VertexId::Pair(x, y) => Ok(vec![
                VertexId::Pair(x - 1, *y),
                VertexId::Pair(*x, y - 1),
                VertexId::Pair(*x, y + 1),
                VertexId::Pair(x + 1, *y),
            ]),
            _ => Err(Error::InvalidVertex(v.clone())),
        }
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(4)
    }

    // Box around S grown by one; its outer ring is connected and meets every
    // infinite component.
    fn hull(&self, s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        Some(pairs(s).map(|ps| {
            let x0 = ps.iter().map(|p| p.0).min().unwrap() - 1;
            let x1 = ps.iter().map(|p| p.0).max().unwrap() + 1;
            let y0 = ps.iter().map(|p| p.1).min().unwrap() - 1;
            let y1 = ps.iter().map(|p| p.1).max().unwrap() + 1;
            let mut region = BTreeSet::new();
            let mut frontier = BTreeSet::new();
            for x in x0..=x1 {
                for y in y0..=y1 {
                    region.insert(VertexId::Pair(x, y));
                    if x == x0 || x == x1 || y == y0 || y == y1 {
                        frontier.insert(VertexId::Pair(x, y));
                    }
                }
            }
            Hull { region, frontier }
        }))
    }
}

/// The ladder `Z × K2`; vertices `(i, 0)` and `(i, 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Ladder;

impl Graph for Ladder {
    fn name(&self) -> String {
        "ladder".into()
    }

    fn root(&self) -> VertexId {
        VertexId::Pair(0, 0)
    }

    fn contains(&self, v: &VertexId) -> bool {
        matches!(v, VertexId::Pair(_, y) if *y == 0 || *y == 1)
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        match v {
            VertexId::Pair(x, y) if *y == 0 || *y == 1 => Ok(vec![
                VertexId::Pair(x - 1, *y),
                VertexId::Pair(*x, 1 - y),
                VertexId::Pair(x + 1, *y),
            ]),
            _ => Err(Error::InvalidVertex(v.clone())),
        }
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(3)
    }

    fn hull(&self, s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        Some(pairs(s).map(|ps| {
            let lo = ps.iter().map(|p| p.0).min().unwrap() - 1;
            let hi = ps.iter().map(|p| p.0).max().unwrap() + 1;
            let mut region = BTreeSet::new();
            let mut frontier = BTreeSet::new();
            for x in lo..=hi {
                for y in 0..2 {
                    region.insert(VertexId::Pair(x, y));
                    if x == lo || x == hi {
                        frontier.insert(VertexId::Pair(x, y));
                    }
                }
            }
            Hull { region, frontier }
        }))
    }
}

/// Reduced-word tree helpers: a node is a word, its parent drops the last letter.
pub(crate) mod words {
    use alloc::collections::BTreeSet;
    use alloc::vec::Vec;

    pub fn common_prefix_len(a: &[u32], b: &[u32]) -> usize {
        a.iter().zip(b).take_while(|(x, y)| x == y).count()
    }

    /// Minimal subtree containing all `nodes` (union of paths to their common ancestor).
    pub fn subtree_hull<'a>(nodes: impl IntoIterator<Item = &'a [u32]>) -> BTreeSet<Vec<u32>> {
        let nodes: Vec<&[u32]> = nodes.into_iter().collect();
        let mut out = BTreeSet::new();
        let Some(first) = nodes.first() else { return out };
        let lcp = nodes.iter().fold(first.len(), |acc, w| acc.min(common_prefix_len(first, w)));
        for w in nodes {
            for len in lcp..=w.len() {
                out.insert(w[..len].to_vec());
            }
        }
        out
    }
}

/// The `d`-regular tree as the Cayley graph of the free product of `d`
/// copies of `Z/2`: nodes are words without repeated adjacent letters.
#[derive(Clone, Copy, Debug)]
pub struct RegularTree {
    degree: u32,
}

impl RegularTree {
    pub fn new(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(domain!("tree(d) needs d >= 2, got {degree}"));
        }
        Ok(RegularTree { degree })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn valid(&self, w: &[u32]) -> bool {
        w.iter().all(|&l| l < self.degree) && w.windows(2).all(|p| p[0] != p[1])
    }

    /// Right multiplication by a letter.
    pub fn step(w: &[u32], letter: u32) -> Vec<u32> {
        let mut out = w.to_vec();
        if out.last() == Some(&letter) {
            out.pop();
        } else {
            out.push(letter);
        }
        out
    }
}

impl Graph for RegularTree {
    fn name(&self) -> String {
        format!("tree({})", self.degree)
    }

    fn root(&self) -> VertexId {
        VertexId::Word(Vec::new())
    }

    fn contains(&self, v: &VertexId) -> bool {
        v.word().is_some_and(|w| self.valid(w))
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        match v {
            VertexId::Word(w) if self.valid(w) => {
                let mut out: Vec<VertexId> =
                    (0..self.degree).map(|l| VertexId::Word(RegularTree::step(w, l))).collect();
                out.sort();
                Ok(out)
            }
            _ => Err(Error::InvalidVertex(v.clone())),
        }
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.degree as usize)
    }

    // Subtree hull of S plus its neighbours; every branch hanging off the
    // hull is infinite.
    fn hull(&self, s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        let words: Result<Vec<&[u32]>> = s
            .iter()
            .map(|v| match v {
                VertexId::Word(w) if self.valid(w) => Ok(w.as_slice()),
                _ => Err(Error::InvalidVertex(v.clone())),
            })
            .collect();
        Some(words.map(|ws| {
            let core = words::subtree_hull(ws);
            let mut region: BTreeSet<VertexId> = BTreeSet::new();
            let mut frontier = BTreeSet::new();
            for w in &core {
                region.insert(VertexId::Word(w.clone()));
            }
            for w in &core {
                for l in 0..self.degree {
                    let n = RegularTree::step(w, l);
                    if !core.contains(&n) {
                        region.insert(VertexId::Word(n.clone()));
                        frontier.insert(VertexId::Word(n));
                    }
                }
            }
            Hull { region, frontier }
        }))
    }
}
