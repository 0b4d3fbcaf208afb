//! Tree amalgamations `G1 ∗_T G2` of finite graphs as lazily explored graphs.
//!
//! Nodes of the connecting tree are label sequences read from a fixed root
//! (a copy of `G1`): a node of even length is a copy of `G1`, of odd length a
//! copy of `G2`. The label on the edge back to the parent is fixed by a
//! canonical rule, the remaining labels of the node's index set lead to its
//! children. Vertices of the amalgam are classes of `(node, local vertex)`
//! pairs under the bonding edges, keyed by their least pair.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::explore;
use crate::graph::{words, FiniteGraph, Graph, GraphHandle, Hull};
use crate::group::{GraphMorphism, GroupAction, VertexMap, Word};
use crate::separation::{distinguishes, end_proxies};
use crate::tree_decomp::{induced_separation, NodesFn, PartFn, Parts, TreeDecomposition, TreeHandle};
use crate::vertex::VertexId;

/// Largest class we expand before suspecting infinite identification.
pub const CLOSURE_CAP: usize = 10_000;

macro_rules! spec_err {
    ($($arg:tt)*) => { Error::Spec(format!($($arg)*)) };
}

/// One factor graph with its labelled adhesion sets and declared action.
#[derive(Clone, Debug)]
pub struct FactorSpec {
    pub graph: FiniteGraph,
    /// Adhesion set for every label of the factor's index set.
    pub adhesion: BTreeMap<u32, Vec<VertexId>>,
    pub action: GroupAction,
}

/// Extra data for a self-amalgamation of Type 2.
#[derive(Clone, Debug)]
pub struct TypeTwo {
    /// Identification of the second index set with the first.
    pub identify: BTreeMap<u32, u32>,
    /// `J ⊆ I1`.
    pub j: BTreeSet<u32>,
}

/// The full data of a tree amalgamation.
#[derive(Clone, Debug)]
pub struct AmalgamSpec {
    pub name: String,
    pub factors: [FactorSpec; 2],
    /// `φ_{kℓ}` for `k ∈ I1`, `ℓ ∈ I2`, as pairs `(x, φ_{kℓ}(x))`.
    pub bonding: BTreeMap<(u32, u32), Vec<(VertexId, VertexId)>>,
    pub type2: Option<TypeTwo>,
}

impl AmalgamSpec {
    pub fn labels(&self, side: usize) -> Vec<u32> {
        self.factors[side].adhesion.keys().copied().collect()
    }
}

#[derive(Clone, Debug)]
struct Side {
    graph: FiniteGraph,
    adj: Vec<Vec<u32>>,
    labels: Vec<u32>,
    sets: BTreeMap<u32, Vec<u32>>,
    member_of: Vec<Vec<u32>>,
    /// Every element of the declared group with a shortest word, as local permutations.
    elements: Vec<(Word, Vec<u32>)>,
}

#[derive(Debug)]
struct Core {
    spec: AmalgamSpec,
    sides: [Side; 2],
    bond: BTreeMap<(u32, u32), BTreeMap<u32, u32>>,
    min_label: [u32; 2],
    tree_infinite: bool,
    same_factors: bool,
}

fn compile_side(f: &FactorSpec, which: usize) -> Result<Side> {
    let g = &f.graph;
    if !g.is_connected() {
        return Err(spec_err!("factor {} ({}) is not connected", which + 1, g.name()));
    }
    if f.adhesion.is_empty() {
        return Err(spec_err!("factor {} has no adhesion sets", which + 1));
    }
    let idx = |v: &VertexId| -> Result<u32> {
        g.index_of(v).map(|i| i as u32).ok_or_else(|| spec_err!("{v} is not a vertex of factor {}", which + 1))
    };
    let n = g.len();
    let adj = g
        .vertex_list()
        .iter()
        .map(|v| g.neighbor_list(v).iter().map(&idx).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut sets = BTreeMap::new();
    let mut member_of = vec![Vec::new(); n];
    for (k, s) in &f.adhesion {
        let mut local: Vec<u32> = s.iter().map(&idx).collect::<Result<_>>()?;
        local.sort_unstable();
        local.dedup();
        if local.is_empty() {
            return Err(spec_err!("adhesion set {k} is empty"));
        }
        for &x in &local {
            member_of[x as usize].push(*k);
        }
        sets.insert(*k, local);
    }
    for m in &f.action.generators {
        let Some(map) = m.support() else {
            return Err(spec_err!("factor actions must be given by permutations"));
        };
        let full: BTreeMap<VertexId, VertexId> =
            g.vertex_list().iter().map(|v| (v.clone(), map.get(v).cloned().unwrap_or_else(|| v.clone()))).collect();
        if map.keys().any(|v| !g.contains(v)) || !g.is_automorphism(&full) {
            return Err(spec_err!("generator {} is not an automorphism of factor {}", m.tag(), which + 1));
        }
    }
    let elements = f
        .action
        .elements_exact(g.vertex_list())?
        .into_iter()
        .map(|(w, sig)| Ok((w, sig.iter().map(&idx).collect::<Result<Vec<_>>>()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Side { graph: g.clone(), adj, labels: f.adhesion.keys().copied().collect(), sets, member_of, elements })
}

impl Core {
    fn new(spec: AmalgamSpec) -> Result<Self> {
        let sides = [compile_side(&spec.factors[0], 0)?, compile_side(&spec.factors[1], 1)?];
        if sides[0].labels.iter().any(|k| sides[1].labels.contains(k)) {
            return Err(spec_err!("index sets of the two factors must be disjoint"));
        }
        let size = sides[0].sets.values().next().unwrap().len();
        if sides.iter().any(|s| s.sets.values().any(|x| x.len() != size)) {
            return Err(spec_err!("adhesion sets must all have the same cardinality"));
        }
        let mut bond = BTreeMap::new();
        for &k in &sides[0].labels {
            for &l in &sides[1].labels {
                let pairs = spec.bonding.get(&(k, l)).ok_or_else(|| spec_err!("missing bonding map for ({k},{l})"))?;
                let mut fwd = BTreeMap::new();
                let mut inv = BTreeMap::new();
                for (x, y) in pairs {
                    let xi = sides[0].graph.index_of(x).ok_or_else(|| spec_err!("bonding ({k},{l}): unknown {x}"))? as u32;
                    let yi = sides[1].graph.index_of(y).ok_or_else(|| spec_err!("bonding ({k},{l}): unknown {y}"))? as u32;
                    if fwd.insert(xi, yi).is_some() || inv.insert(yi, xi).is_some() {
                        return Err(spec_err!("bonding map ({k},{l}) is not injective"));
                    }
                }
                let dom: Vec<u32> = fwd.keys().copied().collect();
                let img: Vec<u32> = inv.keys().copied().collect();
                if dom != sides[0].sets[&k] || img != sides[1].sets[&l] {
                    return Err(spec_err!("bonding map ({k},{l}) is not a bijection between the adhesion sets"));
                }
                bond.insert((k, l), fwd);
                bond.insert((l, k), inv);
            }
        }
        for key in spec.bonding.keys() {
            if !bond.contains_key(key) {
                return Err(spec_err!("bonding map for unknown labels {key:?}"));
            }
        }
        let same_factors = sides[0].graph == sides[1].graph
            && sides[0].elements.iter().map(|e| &e.1).collect::<BTreeSet<_>>()
                == sides[1].elements.iter().map(|e| &e.1).collect::<BTreeSet<_>>();
        if let Some(t2) = &spec.type2 {
            if !same_factors {
                return Err(spec_err!("Type 2 data needs equal factors with equal actions"));
            }
            let img: BTreeSet<u32> = t2.identify.values().copied().collect();
            let dom: BTreeSet<u32> = t2.identify.keys().copied().collect();
            if dom != sides[1].labels.iter().copied().collect() || img != sides[0].labels.iter().copied().collect() {
                return Err(spec_err!("Type 2 identification must be a bijection from I2 onto I1"));
            }
            if !t2.j.iter().all(|k| sides[0].labels.contains(k)) || t2.j.is_empty() || t2.j.len() == sides[0].labels.len() {
                return Err(spec_err!("J must be a nonempty proper subset of I1"));
            }
        }
        let min_label = [sides[0].labels[0], sides[1].labels[0]];
        let tree_infinite = sides[0].labels.len() >= 2 && sides[1].labels.len() >= 2;
        Ok(Core { spec, sides, bond, min_label, tree_infinite, same_factors })
    }

    fn side_of(t: &[u32]) -> usize {
        t.len() % 2
    }

    fn factor(&self, t: &[u32]) -> &Side {
        &self.sides[Core::side_of(t)]
    }

    /// Label seen from the far end of an edge leaving a side-`s` node with label `k`.
    fn reverse_label(&self, s: usize, k: u32) -> u32 {
        match &self.spec.type2 {
            None => self.min_label[1 - s],
            Some(t2) => {
                let first_outside = *self.sides[0].labels.iter().find(|l| !t2.j.contains(l)).unwrap();
                let first_inside = *t2.j.iter().next().unwrap();
                let back = |l: u32| *t2.identify.iter().find(|(_, v)| **v == l).unwrap().0;
                if s == 0 {
                    if t2.j.contains(&k) {
                        back(first_outside)
                    } else {
                        back(first_inside)
                    }
                } else if t2.j.contains(&t2.identify[&k]) {
                    first_outside
                } else {
                    first_inside
                }
            }
        }
    }

    fn back_label(&self, t: &[u32]) -> Option<u32> {
        let (&k, parent) = t.split_last()?;
        Some(self.reverse_label(Core::side_of(parent), k))
    }

    fn out_labels(&self, t: &[u32]) -> Vec<u32> {
        let back = self.back_label(t);
        self.factor(t).labels.iter().copied().filter(|k| Some(*k) != back).collect()
    }

    fn valid_token(&self, t: &[u32]) -> bool {
        (0..t.len()).all(|i| self.out_labels(&t[..i]).contains(&t[i]))
    }

    fn neighbor(&self, t: &[u32], k: u32) -> Vec<u32> {
        if self.back_label(t) == Some(k) {
            t[..t.len() - 1].to_vec()
        } else {
            let mut out = t.to_vec();
            out.push(k);
            out
        }
    }

    /// Label at `t` of the edge towards its neighbour `u`.
    fn label_toward(&self, t: &[u32], u: &[u32]) -> u32 {
        if u.len() > t.len() {
            u[u.len() - 1]
        } else {
            self.back_label(t).expect("non-root node")
        }
    }

    fn tree_neighbors(&self, t: &[u32]) -> Vec<Vec<u32>> {
        self.factor(t).labels.iter().map(|&k| self.neighbor(t, k)).collect()
    }

    fn closure(&self, t: &[u32], x: u32) -> Result<BTreeSet<(Vec<u32>, u32)>> {
        let mut seen: BTreeSet<(Vec<u32>, u32)> = [(t.to_vec(), x)].into_iter().collect();
        let mut queue: VecDeque<(Vec<u32>, u32)> = [(t.to_vec(), x)].into_iter().collect();
        while let Some((u, y)) = queue.pop_front() {
            for &k in &self.factor(&u).member_of[y as usize] {
                let v = self.neighbor(&u, k);
                let l = self.label_toward(&v, &u);
                let z = self.bond[&(k, l)][&y];
                if seen.insert((v.clone(), z)) {
                    if seen.len() > CLOSURE_CAP {
                        return Err(Error::Budget(format!(
                            "identification class exceeds {CLOSURE_CAP} copies (infinite identification?)"
                        )));
                    }
                    queue.push_back((v, z));
                }
            }
        }
        Ok(seen)
    }

    fn key(&self, t: &[u32], x: u32) -> Result<VertexId> {
        let (node, local) = self.closure(t, x)?.into_iter().next().expect("nonempty class");
        Ok(VertexId::Class { node, local })
    }

    fn parse(&self, v: &VertexId) -> Result<(Vec<u32>, u32)> {
        match v {
            VertexId::Class { node, local }
                if self.valid_token(node) && (*local as usize) < self.factor(node).graph.len() =>
            {
                Ok((node.clone(), *local))
            }
            _ => Err(Error::InvalidVertex(v.clone())),
        }
    }

    fn parse_node(&self, v: &VertexId) -> Result<Vec<u32>> {
        match v {
            VertexId::Word(w) if self.valid_token(w) => Ok(w.clone()),
            _ => Err(Error::InvalidVertex(v.clone())),
        }
    }

    fn all_nodes(&self) -> Option<Vec<Vec<u32>>> {
        if self.tree_infinite {
            return None;
        }
        let mut out = vec![Vec::new()];
        let mut i = 0;
        while i < out.len() {
            let t = out[i].clone();
            for k in self.out_labels(&t) {
                let mut c = t.clone();
                c.push(k);
                out.push(c);
            }
            i += 1;
        }
        out.sort();
        Some(out)
    }

    fn part(&self, t: &[u32]) -> Result<BTreeSet<VertexId>> {
        (0..self.factor(t).graph.len() as u32).map(|x| self.key(t, x)).collect()
    }

    fn support(&self, v: &VertexId) -> Result<BTreeSet<Vec<u32>>> {
        let (t, x) = self.parse(v)?;
        Ok(self.closure(&t, x)?.into_iter().map(|(u, _)| u).collect())
    }
}

/// The connecting tree of an amalgamation; nodes are [`VertexId::Word`] tokens.
#[derive(Clone)]
pub struct ConnectingTree(Arc<Core>);

impl fmt::Debug for ConnectingTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConnectingTree({})", self.0.spec.name)
    }
}

impl Graph for ConnectingTree {
    fn name(&self) -> String {
        format!("tree[{}]", self.0.spec.name)
    }

    fn root(&self) -> VertexId {
        VertexId::Word(Vec::new())
    }

    fn contains(&self, v: &VertexId) -> bool {
        self.0.parse_node(v).is_ok()
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let t = self.0.parse_node(v)?;
        let mut out: Vec<VertexId> = self.0.tree_neighbors(&t).into_iter().map(VertexId::Word).collect();
        out.sort();
        Ok(out)
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.0.sides[0].labels.len().max(self.0.sides[1].labels.len()))
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        self.0.all_nodes().map(|ns| ns.into_iter().map(VertexId::Word).collect())
    }

    fn hull(&self, s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        if !self.0.tree_infinite {
            return Some(Ok(Hull { region: self.vertices()?.into_iter().collect(), frontier: BTreeSet::new() }));
        }
        let nodes: Result<Vec<Vec<u32>>> = s.iter().map(|v| self.0.parse_node(v)).collect();
        Some(nodes.map(|ns| {
            let core = words::subtree_hull(ns.iter().map(|n| n.as_slice()));
            let mut region: BTreeSet<VertexId> = core.iter().cloned().map(VertexId::Word).collect();
            let mut frontier = BTreeSet::new();
            for t in &core {
                for u in self.0.tree_neighbors(t) {
                    if !core.contains(&u) {
                        region.insert(VertexId::Word(u.clone()));
                        frontier.insert(VertexId::Word(u));
                    }
                }
            }
            Hull { region, frontier }
        }))
    }
}

/// The amalgamated graph; vertices are [`VertexId::Class`] keys.
#[derive(Clone)]
pub struct AmalgamGraph(Arc<Core>);

impl fmt::Debug for AmalgamGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AmalgamGraph({})", self.0.spec.name)
    }
}

impl Graph for AmalgamGraph {
    fn name(&self) -> String {
        self.0.spec.name.clone()
    }

    fn root(&self) -> VertexId {
        VertexId::Class { node: Vec::new(), local: 0 }
    }

    fn contains(&self, v: &VertexId) -> bool {
        match self.0.parse(v) {
            Ok((t, x)) => self.0.key(&t, x).is_ok_and(|k| &k == v),
            Err(_) => false,
        }
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let (t, x) = self.0.parse(v)?;
        let members = self.0.closure(&t, x)?;
        if members.iter().next() != Some(&(t.clone(), x)) {
            return Err(Error::InvalidVertex(v.clone()));
        }
        let mut out = BTreeSet::new();
        for (u, y) in &members {
            for &z in &self.0.factor(u).adj[*y as usize] {
                if !members.contains(&(u.clone(), z)) {
                    out.insert(self.0.key(u, z)?);
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    fn degree_bound(&self) -> Option<usize> {
        None
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        let nodes = self.0.all_nodes()?;
        let mut out = BTreeSet::new();
        for t in nodes {
            out.extend(self.0.part(&t).ok()?);
        }
        Some(out.into_iter().collect())
    }

    // Branches of the connecting tree hanging off the hull of the supports
    // of S avoid S and are connected and infinite.
    fn hull(&self, s: &BTreeSet<VertexId>) -> Option<Result<Hull>> {
        if !self.0.tree_infinite {
            let all: BTreeSet<VertexId> = self.vertices()?.into_iter().collect();
            return Some(Ok(Hull { region: all, frontier: BTreeSet::new() }));
        }
        Some((|| {
            let mut supports: Vec<Vec<u32>> = Vec::new();
            for v in s {
                supports.extend(self.0.support(v)?);
            }
            let core = words::subtree_hull(supports.iter().map(|n| n.as_slice()));
            let mut region = BTreeSet::new();
            let mut frontier = BTreeSet::new();
            for t in &core {
                region.extend(self.0.part(t)?);
                for u in self.0.tree_neighbors(t) {
                    if !core.contains(&u) {
                        let p = self.0.part(&u)?;
                        region.extend(p.iter().cloned());
                        frontier.extend(p);
                    }
                }
            }
            Ok(Hull { region, frontier })
        })())
    }
}

/// A constructed amalgamation: the graph, its connecting tree and the spec.
#[derive(Clone, Debug)]
pub struct Amalgam {
    core: Arc<Core>,
    pub graph: GraphHandle,
    pub tree: GraphHandle,
}

pub fn construct_amalgam(spec: &AmalgamSpec) -> Result<Amalgam> {
    let core = Arc::new(Core::new(spec.clone())?);
    Ok(Amalgam {
        graph: Arc::new(AmalgamGraph(core.clone())),
        tree: Arc::new(ConnectingTree(core.clone())),
        core,
    })
}

/// Where a class of the amalgam lives in the connecting tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentificationRecord {
    pub class: VertexId,
    pub support: Vec<VertexId>,
    pub size: usize,
}

impl Amalgam {
    pub fn spec(&self) -> &AmalgamSpec {
        &self.core.spec
    }

    pub fn adhesion(&self) -> usize {
        self.core.sides[0].sets.values().next().unwrap().len()
    }

    pub fn tree_is_infinite(&self) -> bool {
        self.core.tree_infinite
    }

    /// Tree node reached from the root by following `labels`.
    pub fn node(&self, labels: &[u32]) -> Result<VertexId> {
        let v = VertexId::Word(labels.to_vec());
        self.core.parse_node(&v)?;
        Ok(v)
    }

    /// Class of local vertex `x` (of the factor copy at `node`).
    pub fn class_of(&self, node: &VertexId, x: &VertexId) -> Result<VertexId> {
        let t = self.core.parse_node(node)?;
        let i = self.core.factor(&t).graph.index_of(x).ok_or_else(|| Error::InvalidVertex(x.clone()))?;
        self.core.key(&t, i as u32)
    }

    /// `π(V(G_t))`.
    pub fn part(&self, node: &VertexId) -> Result<BTreeSet<VertexId>> {
        self.core.part(&self.core.parse_node(node)?)
    }

    /// The label of the tree edge from `t` towards the neighbouring node `u`.
    pub fn edge_label(&self, t: &VertexId, u: &VertexId) -> Result<u32> {
        let (a, b) = (self.core.parse_node(t)?, self.core.parse_node(u)?);
        if !self.core.tree_neighbors(&a).contains(&b) {
            return Err(crate::error::domain!("{t} and {u} are not adjacent"));
        }
        Ok(self.core.label_toward(&a, &b))
    }

    pub fn identification(&self, class: &VertexId) -> Result<IdentificationRecord> {
        let support: Vec<VertexId> = self.core.support(class)?.into_iter().map(VertexId::Word).collect();
        Ok(IdentificationRecord { class: class.clone(), size: support.len(), support })
    }

    /// Identification sizes of all classes meeting nodes within distance 2 of
    /// the root (which covers every orbit of local vertices of both factors)
    /// are at most `bound`.
    pub fn has_finite_identification(&self, bound: usize) -> Result<bool> {
        for t in explore::ball_around(self.tree.as_ref(), &self.tree.root(), 2)?.vertices {
            for v in self.part(&t)? {
                if self.identification(&v)?.size > bound {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Largest identification size near the root.
    pub fn max_identification(&self) -> Result<usize> {
        let mut m = 0;
        for t in explore::ball_around(self.tree.as_ref(), &self.tree.root(), 2)?.vertices {
            for v in self.part(&t)? {
                m = m.max(self.identification(&v)?.size);
            }
        }
        Ok(m)
    }
}

/// Whether `π` is a bijection from some copy `G_v` onto the amalgam.
///
/// Uses the sufficient condition (a factor whose only adhesion set is its
/// whole vertex set, with one label); otherwise checks the root and its
/// first neighbour, exhaustively on finite trees and against classes within
/// tree distance 4 on infinite ones.
pub fn is_trivial(a: &Amalgam) -> Result<bool> {
    for s in &a.core.sides {
        if s.labels.len() == 1 && s.sets.values().next().unwrap().len() == s.graph.len() {
            return Ok(true);
        }
    }
    let tree = a.tree.as_ref();
    let first = VertexId::Word(vec![a.core.min_label[0]]);
    for v in [tree.root(), first] {
        let part = a.part(&v)?;
        if part.len() != a.core.factor(v.word().unwrap()).graph.len() {
            continue;
        }
        let window = match tree.vertices() {
            Some(all) => all,
            None => explore::ball_around(tree, &v, 4)?.vertices,
        };
        let mut onto = true;
        for t in window {
            if !a.part(&t)?.is_subset(&part) {
                onto = false;
                break;
            }
        }
        if onto {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A witness that the amalgamation respects one group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RespectWitness {
    /// The permutation `π` of the index set.
    pub permutation: BTreeMap<u32, u32>,
    /// For every `k`: the index `ℓ` and the stabilizer element `τ`.
    pub choices: BTreeMap<u32, (u32, Word)>,
}

fn apply_local(p: &[u32], x: u32) -> u32 {
    p[x as usize]
}

fn maps_set(p: &[u32], a: &[u32], b: &[u32]) -> bool {
    let mut img: Vec<u32> = a.iter().map(|&x| apply_local(p, x)).collect();
    img.sort_unstable();
    img == b
}

/// Perfect matching `k ↦ k'` choosing from `options[k]`, by backtracking.
fn matching<T: Clone>(keys: &[u32], options: &BTreeMap<u32, Vec<(u32, T)>>) -> Option<BTreeMap<u32, (u32, T)>> {
    fn go<T: Clone>(
        i: usize,
        keys: &[u32],
        options: &BTreeMap<u32, Vec<(u32, T)>>,
        used: &mut BTreeSet<u32>,
        out: &mut BTreeMap<u32, (u32, T)>,
    ) -> bool {
        if i == keys.len() {
            return true;
        }
        for (k2, w) in options.get(&keys[i]).map(|v| v.as_slice()).unwrap_or(&[]) {
            if used.insert(*k2) {
                out.insert(keys[i], (*k2, w.clone()));
                if go(i + 1, keys, options, used, out) {
                    return true;
                }
                out.remove(&keys[i]);
                used.remove(k2);
            }
        }
        false
    }
    let mut out = BTreeMap::new();
    go(0, keys, options, &mut BTreeSet::new(), &mut out).then_some(out)
}

/// Group elements of a side reachable by words of length at most `budget`.
fn within_budget(side: &Side, budget: usize) -> impl Iterator<Item = &(Word, Vec<u32>)> {
    side.elements.iter().filter(move |(w, _)| w.len() <= budget)
}

/// An image label with the group element that realises the bonding equations.
type Choice = (u32, Word);

/// Searches `π`, `ℓ` and `τ` with `φ_{kℓ} = τ ∘ φ_{π(k)ℓ} ∘ γ|S_k` for all `k`,
/// where `γ` (a local permutation of factor `side`) comes from the declared action.
pub fn respects_check(a: &Amalgam, side: usize, gamma: &[u32], budget: usize) -> Option<RespectWitness> {
    let c = &a.core;
    let (mine, other) = (&c.sides[side], &c.sides[1 - side]);
    let mut options: BTreeMap<u32, Vec<(u32, Choice)>> = BTreeMap::new();
    for &k in &mine.labels {
        let sk = &mine.sets[&k];
        for &k2 in &mine.labels {
            if !maps_set(gamma, sk, &mine.sets[&k2]) {
                continue;
            }
            'ell: for &l in &other.labels {
                let sl = &other.sets[&l];
                for (w, tau) in within_budget(other, budget) {
                    if !maps_set(tau, sl, sl) {
                        continue;
                    }
                    let ok = sk.iter().all(|&x| {
                        let lhs = c.bond[&(k, l)][&x];
                        let rhs = apply_local(tau, c.bond[&(k2, l)][&apply_local(gamma, x)]);
                        lhs == rhs
                    });
                    if ok {
                        options.entry(k).or_default().push((k2, (l, w.clone())));
                        break 'ell;
                    }
                }
            }
        }
    }
    let m = matching(&mine.labels, &options)?;
    let mut permutation = BTreeMap::new();
    let mut choices = BTreeMap::new();
    for (k, (k2, choice)) in m {
        permutation.insert(k, k2);
        choices.insert(k, choice);
    }
    Some(RespectWitness { permutation, choices })
}

/// A word `γ` of the far factor's group with `φ_{kℓ} = γ ∘ φ_{kℓ'}` on `S_k`.
pub fn consistency_check(a: &Amalgam, k: u32, l: u32, l2: u32, budget: usize) -> Option<Word> {
    let c = &a.core;
    let side = if c.sides[0].labels.contains(&k) { 0 } else { 1 };
    let far = &c.sides[1 - side];
    let sk = &c.sides[side].sets.get(&k)?;
    if !far.labels.contains(&l) || !far.labels.contains(&l2) {
        return None;
    }
    within_budget(far, budget)
        .find(|(_, g)| sk.iter().all(|&x| c.bond[&(k, l)][&x] == apply_local(g, c.bond[&(k, l2)][&x])))
        .map(|(w, _)| w.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmalgamType {
    Type1,
    Type2,
    Neither,
}

impl fmt::Display for AmalgamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmalgamType::Type1 => "Type1",
            AmalgamType::Type2 => "Type2",
            AmalgamType::Neither => "Neither",
        })
    }
}

/// The respect check for one group element.
#[derive(Clone, Debug)]
pub struct RespectEntry {
    pub side: usize,
    pub word: String,
    pub witness: Option<RespectWitness>,
}

#[derive(Clone, Debug)]
pub struct TypeReport {
    pub kind: AmalgamType,
    pub budget: usize,
    pub respects: Vec<RespectEntry>,
    /// `(k, ℓ, ℓ')` triples whose bonding maps are not consistent, for each type.
    pub type1_failures: Vec<(u32, u32, u32)>,
    pub type2_failures: Vec<(u32, u32, u32)>,
}

impl TypeReport {
    pub fn respects_all(&self) -> bool {
        self.respects.iter().all(|e| e.witness.is_some())
    }
}

/// Type 1 is tried first, then Type 2 when its data is present.
/// Verification covers group elements with words of length at most `budget`.
pub fn classify_type(a: &Amalgam, budget: usize) -> TypeReport {
    let c = &a.core;
    let mut respects = Vec::new();
    for side in 0..2 {
        let action = &c.spec.factors[side].action;
        for (w, g) in within_budget(&c.sides[side], budget) {
            respects.push(RespectEntry { side, word: action.word_tag(w), witness: respects_check(a, side, g, budget) });
        }
    }
    let cons_failures = |ks: &[u32], ls: &[u32]| -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for &k in ks {
            for &l in ls {
                for &l2 in ls {
                    if l < l2 && consistency_check(a, k, l, l2, budget).is_none() {
                        out.push((k, l, l2));
                    }
                }
            }
        }
        out
    };
    let type1_failures = cons_failures(&c.sides[0].labels, &c.sides[1].labels);
    let type2_failures = match &c.spec.type2 {
        Some(t2) => {
            let outside: Vec<u32> =
                t2.identify.iter().filter(|(_, v)| !t2.j.contains(v)).map(|(k, _)| *k).collect();
            let inside: Vec<u32> = t2.j.iter().copied().collect();
            cons_failures(&inside, &outside)
        }
        None => Vec::new(),
    };
    let ok = respects.iter().all(|e| e.witness.is_some());
    let kind = if ok && type1_failures.is_empty() {
        AmalgamType::Type1
    } else if ok && c.spec.type2.is_some() && type2_failures.is_empty() {
        AmalgamType::Type2
    } else {
        AmalgamType::Neither
    };
    TypeReport { kind, budget, respects, type1_failures, type2_failures }
}

/// `(T, {π(V(G_u))})`, evaluated lazily.
pub fn corresponding_td(a: &Amalgam) -> Result<TreeDecomposition> {
    let core = a.core.clone();
    let part: PartFn = Arc::new(move |t: &VertexId| core.part(&core.parse_node(t)?));
    let core = a.core.clone();
    let nodes_of: NodesFn = Arc::new(move |v: &VertexId| Ok(core.support(v)?.into_iter().map(VertexId::Word).collect()));
    let tree = if a.core.tree_infinite {
        TreeHandle::lazy(a.tree.clone(), vec![a.tree.root(), VertexId::Word(vec![a.core.min_label[0]])])?
    } else {
        TreeHandle { tree: a.tree.clone(), root: a.tree.root(), domain: None }
    };
    Ok(TreeDecomposition {
        graph: a.graph.clone(),
        tree,
        parts: Parts::Lazy { part, nodes_of },
        adhesion_bound: Some(a.adhesion()),
    })
}

/// Whether a separation induced at a tree edge at the root distinguishes two
/// end proxies at resolution `r`.
pub fn amalgam_distinguishes_ends(a: &Amalgam, r: usize) -> Result<bool> {
    let proxies = end_proxies(&a.graph, r)?.proxies;
    if proxies.len() < 2 {
        return Ok(false);
    }
    let td = corresponding_td(a)?;
    let root = a.tree.root();
    for t in a.tree.neighbors(&root)? {
        let x = induced_separation(&td, &root, &t)?;
        for (i, p) in proxies.iter().enumerate() {
            for q in &proxies[i + 1..] {
                if distinguishes(&x, p, q)? {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

#[derive(Clone, Debug)]
struct NodeData {
    image: Vec<u32>,
    alpha: Vec<u32>,
    labels: BTreeMap<u32, u32>,
}

/// An automorphism of the amalgam determined by the image of the root copy
/// and an isomorphism between the factor copies there, extended along the
/// tree. Choices left open by the data are made deterministically.
#[derive(Clone, Debug)]
struct Lift {
    core: Arc<Core>,
    image: Vec<u32>,
    alpha: Vec<u32>,
    root_labels: Option<BTreeMap<u32, u32>>,
}

impl Lift {
    /// Local isomorphism candidates from a copy of side `from` to side `to`.
    fn group_for(&self, from: usize, to: usize) -> Option<&Side> {
        if from == to {
            Some(&self.core.sides[to])
        } else if self.core.same_factors {
            Some(&self.core.sides[0])
        } else {
            None
        }
    }

    /// `α_v` for the neighbour `v` of `p` along label `k`, when `k ↦ k2`.
    fn child_alpha(&self, p: &[u32], d: &NodeData, k: u32, k2: u32) -> Option<Vec<u32>> {
        let c = &self.core;
        let v = c.neighbor(p, k);
        let w = c.neighbor(&d.image, k2);
        let (l, l2) = (c.label_toward(&v, p), c.label_toward(&w, &d.image));
        let group = self.group_for(Core::side_of(&v), Core::side_of(&w))?;
        let sl = &c.factor(&v).sets[&l];
        let sl2 = &c.factor(&w).sets[&l2];
        group
            .elements
            .iter()
            .find(|(_, g)| {
                maps_set(g, sl, sl2)
                    && sl.iter().all(|&x| apply_local(g, x) == c.bond[&(k2, l2)][&apply_local(&d.alpha, c.bond[&(l, k)][&x])])
            })
            .map(|(_, g)| g.clone())
    }

    fn complete_labels(&self, t: &[u32], d: &mut NodeData) -> Result<()> {
        let c = &self.core;
        let keys: Vec<u32> = c.factor(t).labels.iter().copied().filter(|k| !d.labels.contains_key(k)).collect();
        let taken: BTreeSet<u32> = d.labels.values().copied().collect();
        let mut options: BTreeMap<u32, Vec<(u32, ())>> = BTreeMap::new();
        for &k in &keys {
            for &k2 in &c.factor(&d.image).labels {
                if taken.contains(&k2) || !maps_set(&d.alpha, &c.factor(t).sets[&k], &c.factor(&d.image).sets[&k2]) {
                    continue;
                }
                if self.child_alpha(t, d, k, k2).is_some() {
                    options.entry(k).or_default().push((k2, ()));
                }
            }
        }
        let m = matching(&keys, &options)
            .ok_or_else(|| Error::Unsupported(format!("lift does not extend at node {}", VertexId::Word(t.to_vec()))))?;
        d.labels.extend(m.into_iter().map(|(k, (k2, ()))| (k, k2)));
        Ok(())
    }

    fn node_data(&self, t: &[u32]) -> Result<NodeData> {
        let c = &self.core;
        let mut d = NodeData { image: self.image.clone(), alpha: self.alpha.clone(), labels: BTreeMap::new() };
        match &self.root_labels {
            Some(l) => d.labels = l.clone(),
            None => self.complete_labels(&[], &mut d)?,
        }
        for i in 0..t.len() {
            let p = &t[..i];
            let k = t[i];
            let k2 = d.labels[&k];
            let alpha = self
                .child_alpha(p, &d, k, k2)
                .ok_or_else(|| Error::Unsupported(format!("lift does not extend past {}", VertexId::Word(p.to_vec()))))?;
            let v = &t[..i + 1];
            let w = c.neighbor(&d.image, k2);
            let mut next = NodeData { image: w.clone(), alpha, labels: BTreeMap::new() };
            next.labels.insert(c.label_toward(v, p), c.label_toward(&w, &d.image));
            self.complete_labels(v, &mut next)?;
            d = next;
        }
        Ok(d)
    }

    fn tree_path(a: &[u32], b: &[u32]) -> Vec<Vec<u32>> {
        let n = words::common_prefix_len(a, b);
        let mut out: Vec<Vec<u32>> = (n..=a.len()).rev().map(|i| a[..i].to_vec()).collect();
        out.extend((n + 1..=b.len()).map(|i| b[..i].to_vec()));
        out
    }

    fn preimage(&self, target: &[u32]) -> Result<(Vec<u32>, NodeData)> {
        let c = &self.core;
        let mut p: Vec<u32> = Vec::new();
        let mut d = self.node_data(&p)?;
        for q in Lift::tree_path(&self.image, target).into_iter().skip(1) {
            let k = *d
                .labels
                .iter()
                .find(|(_, k2)| c.neighbor(&d.image, **k2) == q)
                .ok_or_else(|| Error::Internal("lift is not onto the tree".into()))?
                .0;
            p = c.neighbor(&p, k);
            d = self.node_data(&p)?;
        }
        Ok((p, d))
    }

    fn morphisms(self, tag: &str) -> (GraphMorphism, GraphMorphism) {
        let l = Arc::new(self);
        let (a, b, c, d) = (l.clone(), l.clone(), l.clone(), l);
        let tree_fwd: VertexMap = Arc::new(move |v: &VertexId| {
            let t = a.core.parse_node(v)?;
            Ok(VertexId::Word(a.node_data(&t)?.image))
        });
        let tree_inv: VertexMap = Arc::new(move |v: &VertexId| {
            let t = b.core.parse_node(v)?;
            Ok(VertexId::Word(b.preimage(&t)?.0))
        });
        let graph_fwd: VertexMap = Arc::new(move |v: &VertexId| {
            let (t, x) = c.core.parse(v)?;
            let nd = c.node_data(&t)?;
            c.core.key(&nd.image, apply_local(&nd.alpha, x))
        });
        let graph_inv: VertexMap = Arc::new(move |v: &VertexId| {
            let (t, y) = d.core.parse(v)?;
            let (p, nd) = d.preimage(&t)?;
            let x = nd.alpha.iter().position(|&z| z == y).ok_or_else(|| Error::Internal("non-bijective lift".into()))?;
            d.core.key(&p, x as u32)
        });
        (GraphMorphism::map(tag, graph_fwd, graph_inv), GraphMorphism::map(tag, tree_fwd, tree_inv))
    }
}

/// Automorphisms of the amalgam built from the factor actions: the declared
/// generators of the root factor's group extended along the tree, label swaps
/// at the root between equal adhesion sets, and a shift of the root copy.
#[derive(Clone, Debug)]
pub struct LiftedAction {
    pub graph_action: GroupAction,
    pub tree_action: GroupAction,
    /// Candidate generators that did not extend.
    pub dropped: Vec<String>,
}

pub fn lifted_action(a: &Amalgam) -> Result<LiftedAction> {
    let c = &a.core;
    let n0 = c.sides[0].graph.len() as u32;
    let identity: Vec<u32> = (0..n0).collect();
    let mut candidates: Vec<(String, Lift)> = Vec::new();
    let gens = &c.spec.factors[0].action.generators;
    for g in gens {
        let alpha: Vec<u32> = c.sides[0]
            .graph
            .vertex_list()
            .iter()
            .map(|v| Ok(c.sides[0].graph.index_of(&g.apply(v)?).unwrap() as u32))
            .collect::<Result<_>>()?;
        candidates.push((
            format!("lift({})", g.tag()),
            Lift { core: c.clone(), image: Vec::new(), alpha, root_labels: None },
        ));
    }
    let labels = &c.sides[0].labels;
    for (i, &k) in labels.iter().enumerate() {
        for &k2 in &labels[i + 1..] {
            if c.sides[0].sets[&k] == c.sides[0].sets[&k2] {
                let root_labels: BTreeMap<u32, u32> =
                    labels.iter().map(|&l| (l, if l == k { k2 } else if l == k2 { k } else { l })).collect();
                candidates.push((
                    format!("relabel({k},{k2})"),
                    Lift { core: c.clone(), image: Vec::new(), alpha: identity.clone(), root_labels: Some(root_labels) },
                ));
            }
        }
    }
    if c.tree_infinite {
        let first = vec![c.min_label[0]];
        let image = if c.same_factors {
            first
        } else {
            let mut t = first.clone();
            t.push(c.out_labels(&first)[0]);
            t
        };
        candidates.push(("shift".into(), Lift { core: c.clone(), image, alpha: identity, root_labels: None }));
    }
    let mut graph_gens = Vec::new();
    let mut tree_gens = Vec::new();
    let mut dropped = Vec::new();
    let probe = explore::ball_around(a.tree.as_ref(), &a.tree.root(), 3)?;
    for (tag, lift) in candidates {
        let ok = probe.vertices.iter().all(|t| lift.node_data(t.word().unwrap()).is_ok());
        if !ok {
            dropped.push(tag);
            continue;
        }
        let (gm, tm) = lift.morphisms(&tag);
        graph_gens.push(gm);
        tree_gens.push(tm);
    }
    Ok(LiftedAction {
        graph_action: GroupAction::new(graph_gens),
        tree_action: GroupAction::new(tree_gens),
        dropped,
    })
}

/// The connecting tree with its fundamental domain `{root, first neighbour}`.
pub fn connecting_tree(a: &Amalgam) -> Result<TreeHandle> {
    Ok(corresponding_td(a)?.tree)
}
