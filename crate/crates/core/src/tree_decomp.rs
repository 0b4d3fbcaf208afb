//! Tree-decompositions with group actions: validation, induced separations,
//! refinement, compressible edges, contraction and size sequences.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::explore::{ball, ball_around};
use crate::graph::{FiniteGraph, Graph, GraphHandle};
use crate::group::{GraphMorphism, GroupAction};
use crate::separation::{Separation, Side};
use crate::union_find::UnionFind;
use crate::vertex::VertexId;

/// A tree given as a graph, with a root and, for infinite trees, a finite
/// set of nodes meeting every orbit of the acting group.
#[derive(Clone, Debug)]
pub struct TreeHandle {
    pub tree: GraphHandle,
    pub root: VertexId,
    pub domain: Option<Vec<VertexId>>,
}

impl TreeHandle {
    /// A finite tree; checks connectivity and acyclicity.
    pub fn finite(tree: FiniteGraph) -> Result<Self> {
        if !tree.is_connected() || tree.edge_count() + 1 != tree.len() {
            return Err(domain!("{} is not a tree", tree.name()));
        }
        let root = tree.vertex_list()[0].clone();
        Ok(TreeHandle { tree: Arc::new(tree), root, domain: None })
    }

    /// An infinite tree with a declared fundamental domain.
    pub fn lazy(tree: GraphHandle, domain: Vec<VertexId>) -> Result<Self> {
        if domain.is_empty() {
            return Err(domain!("a lazy tree needs a nonempty fundamental domain"));
        }
        let root = tree.root();
        Ok(TreeHandle { tree, root, domain: Some(domain) })
    }

    pub fn is_finite(&self) -> bool {
        self.tree.is_finite()
    }

    /// Nodes examined by orbit questions: all nodes, or the fundamental domain.
    pub fn explored_nodes(&self) -> Result<Vec<VertexId>> {
        match (&self.domain, self.tree.vertices()) {
            (_, Some(vs)) => Ok(vs),
            (Some(d), None) => Ok(d.clone()),
            (None, None) => Err(Error::Unsupported("an infinite tree needs a fundamental domain".into())),
        }
    }

    /// Edges examined by orbit questions: all edges, or those meeting the domain.
    pub fn explored_edges(&self) -> Result<Vec<(VertexId, VertexId)>> {
        let mut out = BTreeSet::new();
        for u in self.explored_nodes()? {
            for v in self.tree.neighbors(&u)? {
                out.insert(ordered(u.clone(), v));
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Tree distance between two nodes.
    pub fn distance(&self, a: &VertexId, b: &VertexId) -> Result<usize> {
        Ok(tree_path(self.tree.as_ref(), a, b)?.len() - 1)
    }
}

fn ordered(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// The node path from `a` to `b`, both ends included.
pub fn tree_path(t: &dyn Graph, a: &VertexId, b: &VertexId) -> Result<Vec<VertexId>> {
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut queue: VecDeque<VertexId> = [a.clone()].into_iter().collect();
    parent.insert(a.clone(), a.clone());
    while let Some(x) = queue.pop_front() {
        if &x == b {
            let mut path = vec![x.clone()];
            let mut cur = x;
            while &cur != a {
                cur = parent[&cur].clone();
                path.push(cur.clone());
            }
            path.reverse();
            return Ok(path);
        }
        for y in t.neighbors(&x)? {
            if !parent.contains_key(&y) {
                parent.insert(y.clone(), x.clone());
                queue.push_back(y);
            }
        }
    }
    Err(domain!("{a} and {b} are not connected in the tree"))
}

pub type PartFn = Arc<dyn Fn(&VertexId) -> Result<BTreeSet<VertexId>> + Send + Sync>;
pub type NodesFn = Arc<dyn Fn(&VertexId) -> Result<Vec<VertexId>> + Send + Sync>;

#[derive(Clone)]
pub enum Parts {
    Finite(BTreeMap<VertexId, BTreeSet<VertexId>>),
    /// `part(t)` and `nodes_of(v)`, the nodes whose parts contain `v`.
    Lazy { part: PartFn, nodes_of: NodesFn },
}

impl fmt::Debug for Parts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parts::Finite(m) => f.debug_map().entries(m.iter()).finish(),
            Parts::Lazy { .. } => f.write_str("Lazy"),
        }
    }
}

/// `(T, (V_t))` for a graph `G`.
#[derive(Clone, Debug)]
pub struct TreeDecomposition {
    pub graph: GraphHandle,
    pub tree: TreeHandle,
    pub parts: Parts,
    /// Declared bound on adhesion set sizes, for lazy decompositions.
    pub adhesion_bound: Option<usize>,
}

impl TreeDecomposition {
    pub fn finite(graph: GraphHandle, tree: TreeHandle, parts: BTreeMap<VertexId, BTreeSet<VertexId>>) -> Result<Self> {
        let nodes = tree.tree.vertices().ok_or_else(|| domain!("finite parts need a finite tree"))?;
        for t in &nodes {
            if !parts.contains_key(t) {
                return Err(domain!("tree node {t} has no part"));
            }
        }
        for (t, p) in &parts {
            if !tree.tree.contains(t) {
                return Err(domain!("part given for unknown tree node {t}"));
            }
            for v in p {
                if !graph.contains(v) {
                    return Err(Error::InvalidVertex(v.clone()));
                }
            }
        }
        Ok(TreeDecomposition { graph, tree, parts: Parts::Finite(parts), adhesion_bound: None })
    }

    pub fn part(&self, t: &VertexId) -> Result<BTreeSet<VertexId>> {
        match &self.parts {
            Parts::Finite(m) => m.get(t).cloned().ok_or_else(|| Error::InvalidVertex(t.clone())),
            Parts::Lazy { part, .. } => part(t),
        }
    }

    /// Nodes whose parts contain `v`, sorted.
    pub fn nodes_of(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        match &self.parts {
            Parts::Finite(m) => Ok(m.iter().filter(|(_, p)| p.contains(v)).map(|(t, _)| t.clone()).collect()),
            Parts::Lazy { nodes_of, .. } => {
                let mut ns = nodes_of(v)?;
                ns.sort();
                ns.dedup();
                Ok(ns)
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.parts, Parts::Finite(_)) && self.tree.is_finite() && self.graph.is_finite()
    }

    /// Tree nodes examined at `probe_radius`.
    pub fn window(&self, probe_radius: usize) -> Result<Vec<VertexId>> {
        match self.tree.tree.vertices() {
            Some(vs) => Ok(vs),
            None => Ok(ball_around(self.tree.tree.as_ref(), &self.tree.root, probe_radius)?.vertices),
        }
    }

    fn graph_window(&self, probe_radius: usize) -> Result<Vec<VertexId>> {
        match self.graph.vertices() {
            Some(vs) => Ok(vs),
            None => Ok(ball_around(self.graph.as_ref(), &self.graph.root(), probe_radius)?.vertices),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdViolation {
    /// A vertex in no part.
    Cover(VertexId),
    /// An edge in no part.
    Edge(VertexId, VertexId),
    /// `vertex` lies in the parts of `t1` and `t3` but not of `t2`, which separates them.
    Subtree { vertex: VertexId, t1: VertexId, t2: VertexId, t3: VertexId },
    /// The part oracle and the node oracle disagree.
    Inconsistent { vertex: VertexId, node: VertexId },
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::Cover(v) => write!(f, "(T1) vertex {v} lies in no part"),
            TdViolation::Edge(u, v) => write!(f, "(T2) edge {u}-{v} lies in no part"),
            TdViolation::Subtree { vertex, t1, t2, t3 } => {
                write!(f, "(T3) vertex {vertex} is in parts {t1} and {t3} but not in {t2} between them")
            }
            TdViolation::Inconsistent { vertex, node } => write!(f, "part of {node} and node list of {vertex} disagree"),
        }
    }
}

/// Checks (T1)–(T3): exhaustively for finite decompositions, on balls of
/// radius `probe_radius` otherwise. Returns the first violation found.
pub fn validate_td(td: &TreeDecomposition, probe_radius: usize) -> Result<Option<TdViolation>> {
    let window = td.window(probe_radius)?;
    for t in &window {
        for v in td.part(t)? {
            if !td.nodes_of(&v)?.contains(t) {
                return Ok(Some(TdViolation::Inconsistent { vertex: v, node: t.clone() }));
            }
        }
    }
    let vertices = td.graph_window(probe_radius)?;
    let inside: BTreeSet<&VertexId> = vertices.iter().collect();
    for v in &vertices {
        if td.nodes_of(v)?.is_empty() {
            return Ok(Some(TdViolation::Cover(v.clone())));
        }
    }
    for v in &vertices {
        let nv = td.nodes_of(v)?;
        for u in td.graph.neighbors(v)? {
            if u > *v && inside.contains(&u) {
                let nu = td.nodes_of(&u)?;
                if !nv.iter().any(|t| nu.contains(t)) {
                    return Ok(Some(TdViolation::Edge(v.clone(), u)));
                }
            }
        }
    }
    for v in &vertices {
        let nodes: BTreeSet<VertexId> = td.nodes_of(v)?.into_iter().collect();
        if let Some((t1, t2, t3)) = disconnected_witness(td.tree.tree.as_ref(), &nodes)? {
            return Ok(Some(TdViolation::Subtree { vertex: v.clone(), t1, t2, t3 }));
        }
    }
    Ok(None)
}

fn disconnected_witness(t: &dyn Graph, nodes: &BTreeSet<VertexId>) -> Result<Option<(VertexId, VertexId, VertexId)>> {
    let Some(first) = nodes.iter().next() else { return Ok(None) };
    let mut seen: BTreeSet<VertexId> = [first.clone()].into_iter().collect();
    let mut stack = vec![first.clone()];
    while let Some(x) = stack.pop() {
        for y in t.neighbors(&x)? {
            if nodes.contains(&y) && seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    let Some(other) = nodes.iter().find(|n| !seen.contains(*n)) else { return Ok(None) };
    let path = tree_path(t, first, other)?;
    let mid = path.iter().find(|x| !nodes.contains(*x)).expect("path leaves the node set").clone();
    Ok(Some((first.clone(), mid, other.clone())))
}

/// Adhesion sets of the examined tree edges.
#[derive(Clone, Debug)]
pub struct AdhesionReport {
    pub sets: BTreeMap<(VertexId, VertexId), BTreeSet<VertexId>>,
    pub max: usize,
    /// All examined adhesion sets are within the declared bound (always true for finite decompositions).
    pub finite_adhesion: bool,
}

pub fn adhesion_sets(td: &TreeDecomposition, probe_radius: usize) -> Result<AdhesionReport> {
    let window: BTreeSet<VertexId> = td.window(probe_radius)?.into_iter().collect();
    let mut sets = BTreeMap::new();
    for t in &window {
        for u in td.tree.tree.neighbors(t)? {
            if u > *t && window.contains(&u) {
                let s: BTreeSet<VertexId> = td.part(t)?.intersection(&td.part(&u)?).cloned().collect();
                sets.insert((t.clone(), u), s);
            }
        }
    }
    let max = sets.values().map(|s| s.len()).max().unwrap_or(0);
    let finite_adhesion = match (td.is_finite(), td.adhesion_bound) {
        (true, _) => true,
        (false, Some(b)) => max <= b,
        (false, None) => false,
    };
    Ok(AdhesionReport { sets, max, finite_adhesion })
}

/// Whether `node` lies on the `t1` side of the tree edge `t1 t2`.
fn on_first_side(t: &dyn Graph, node: &VertexId, t1: &VertexId, t2: &VertexId) -> Result<bool> {
    let mut seen: BTreeSet<VertexId> = [node.clone()].into_iter().collect();
    let mut queue: VecDeque<VertexId> = [node.clone()].into_iter().collect();
    while let Some(x) = queue.pop_front() {
        if &x == t1 {
            return Ok(true);
        }
        if &x == t2 {
            return Ok(false);
        }
        for y in t.neighbors(&x)? {
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    Err(Error::Internal(format!("{node} reaches neither end of {t1}-{t2}")))
}

/// `(⋃_{t ∈ T1} V_t, ⋃_{t ∈ T2} V_t)` where `T1 ∋ t1` and `T2 ∋ t2` are the
/// components of `T − t1t2`.
pub fn induced_separation(td: &TreeDecomposition, t1: &VertexId, t2: &VertexId) -> Result<Separation> {
    let tree = td.tree.tree.as_ref();
    if !tree.neighbors(t1)?.contains(t2) {
        return Err(domain!("{t1}-{t2} is not a tree edge"));
    }
    let s: BTreeSet<VertexId> = td.part(t1)?.intersection(&td.part(t2)?).cloned().collect();
    if let Some(b) = td.adhesion_bound {
        if s.len() > b {
            return Err(Error::Unsupported(format!("adhesion set of {t1}-{t2} exceeds the declared bound {b}")));
        }
    }
    Separation::with_sides(&td.graph, &s, |c| {
        let probe = if s.is_empty() { td.graph.root() } else { c.seed.clone() };
        let home = td
            .nodes_of(&probe)?
            .into_iter()
            .next()
            .ok_or_else(|| domain!("{probe} lies in no part"))?;
        Ok(if on_first_side(tree, &home, t1, t2)? { Side::A } else { Side::B })
    })
}

/// Outcome of an invariance check, with a witness when it fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub witness: Option<String>,
}

/// Whether each generator maps every examined part onto a part, compatibly
/// with tree adjacency. Generators suffice: invariance under them gives
/// invariance under every word.
pub fn is_invariant(td: &TreeDecomposition, action: &GroupAction, probe_radius: usize) -> Result<InvarianceReport> {
    let window = td.window(probe_radius)?;
    let inside: BTreeSet<&VertexId> = window.iter().collect();
    for l in action.letters() {
        let mut images: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for t in &window {
            let part = td.part(t)?;
            let Some(v0) = part.iter().next() else { continue };
            let img: BTreeSet<VertexId> = part.iter().map(|v| action.apply_letter(l, v)).collect::<Result<_>>()?;
            let anchor = action.apply_letter(l, v0)?;
            let mut cands = Vec::new();
            for u in td.nodes_of(&anchor)? {
                if td.part(&u)? == img {
                    cands.push(u);
                }
            }
            if cands.is_empty() {
                return Ok(InvarianceReport {
                    invariant: false,
                    witness: Some(format!("{} maps the part of {t} to a set that is not a part", action.letter_tag(l))),
                });
            }
            images.insert(t.clone(), cands);
        }
        for t in &window {
            for u in td.tree.tree.neighbors(t)? {
                if u <= *t || !inside.contains(&u) {
                    continue;
                }
                let (Some(ct), Some(cu)) = (images.get(t), images.get(&u)) else { continue };
                let mut ok = false;
                for a in ct {
                    let na = td.tree.tree.neighbors(a)?;
                    if cu.iter().any(|b| na.contains(b)) {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Ok(InvarianceReport {
                        invariant: false,
                        witness: Some(format!("{} breaks the tree edge {t}-{u}", action.letter_tag(l))),
                    });
                }
            }
        }
    }
    Ok(InvarianceReport { invariant: true, witness: None })
}

/// (R1) contracting the cover's fibres of `fine` gives `coarse`'s tree, and
/// (R2) each coarse part is the union of the fine parts of its fibre.
///
/// Finite decompositions only; `cover` maps fine nodes to coarse nodes.
pub fn is_refinement(
    fine: &TreeDecomposition,
    coarse: &TreeDecomposition,
    cover: &BTreeMap<VertexId, VertexId>,
) -> Result<bool> {
    let fine_nodes = fine.tree.tree.vertices().ok_or_else(|| Error::Unsupported("refinement needs finite trees".into()))?;
    let coarse_nodes =
        coarse.tree.tree.vertices().ok_or_else(|| Error::Unsupported("refinement needs finite trees".into()))?;
    let mut fibres: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for s in &fine_nodes {
        let t = cover.get(s).ok_or_else(|| domain!("fine node {s} is not covered"))?;
        if !coarse.tree.tree.contains(t) {
            return Err(domain!("cover maps {s} to unknown coarse node {t}"));
        }
        fibres.entry(t.clone()).or_default().insert(s.clone());
    }
    for t in &coarse_nodes {
        let f = fibres.get(t).ok_or_else(|| domain!("coarse node {t} has an empty fibre"))?;
        if disconnected_witness(fine.tree.tree.as_ref(), f)?.is_some() {
            return Err(domain!("the fibre of {t} is not a subtree"));
        }
    }
    let mut quotient_edges = BTreeSet::new();
    for s in &fine_nodes {
        for u in fine.tree.tree.neighbors(s)? {
            if cover[s] != cover[&u] {
                quotient_edges.insert(ordered(cover[s].clone(), cover[&u].clone()));
            }
        }
    }
    let mut coarse_edges = BTreeSet::new();
    for t in &coarse_nodes {
        for u in coarse.tree.tree.neighbors(t)? {
            coarse_edges.insert(ordered(t.clone(), u));
        }
    }
    if quotient_edges != coarse_edges {
        return Ok(false);
    }
    for (t, f) in &fibres {
        let mut union = BTreeSet::new();
        for s in f {
            union.extend(fine.part(s)?);
        }
        if union != coarse.part(t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Stabilizers and orbits of tree nodes and edges: exact for permutation
/// actions on finite trees, budget-relative otherwise.
struct TreeGroup<'a> {
    tree: &'a TreeHandle,
    action: &'a GroupAction,
    /// Node images under every group element, when enumerable.
    perms: Option<Vec<Vec<VertexId>>>,
    nodes: Vec<VertexId>,
    probe: BTreeSet<VertexId>,
}

impl<'a> TreeGroup<'a> {
    fn new(tree: &'a TreeHandle, action: &'a GroupAction) -> Result<Self> {
        let nodes = tree.explored_nodes()?;
        if tree.is_finite() && action.is_permutation_group() {
            let elems = action.elements_exact(&nodes)?;
            let perms = elems
                .iter()
                .map(|(w, _)| nodes.iter().map(|v| action.apply_word(w, v)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let probe = nodes.iter().cloned().collect();
            return Ok(TreeGroup { tree, action, perms: Some(perms), nodes, probe });
        }
        let centres: BTreeSet<VertexId> = nodes.iter().cloned().collect();
        let probe = ball(tree.tree.as_ref(), &centres, 2)?.vertex_set();
        Ok(TreeGroup { tree, action, perms: None, nodes, probe })
    }

    fn image(&self, perm: &[VertexId], v: &VertexId) -> VertexId {
        let i = self.nodes.binary_search(v).expect("node of a finite tree");
        perm[i].clone()
    }

    /// Setwise stabilizer of `x`, as a set of comparable signatures.
    fn stabilizer(&self, x: &BTreeSet<VertexId>) -> Result<BTreeSet<Vec<VertexId>>> {
        match &self.perms {
            Some(perms) => Ok(perms
                .iter()
                .filter(|p| x.iter().map(|v| self.image(p, v)).collect::<BTreeSet<_>>() == *x)
                .cloned()
                .collect()),
            None => Ok(self.action.stabilizer(x, &self.probe)?.signatures),
        }
    }

    fn same_orbit(&self, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> Result<bool> {
        match &self.perms {
            Some(perms) => Ok(perms.iter().any(|p| a.iter().map(|v| self.image(p, v)).collect::<BTreeSet<_>>() == *b)),
            None => Ok(self.action.find_set_map(a, b)?.is_some()),
        }
    }

    fn exact(&self) -> bool {
        self.perms.is_some()
    }

    /// Classes of `items` under the group.
    fn classes(&self, items: &[BTreeSet<VertexId>]) -> Result<Vec<Vec<usize>>> {
        let mut uf = UnionFind::new(items.len());
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if uf.find(i) != uf.find(j) && self.same_orbit(&items[i], &items[j])? {
                    uf.union(i, j);
                }
            }
        }
        Ok(uf.classes())
    }
}

fn single(v: &VertexId) -> BTreeSet<VertexId> {
    [v.clone()].into_iter().collect()
}

fn pair(u: &VertexId, v: &VertexId) -> BTreeSet<VertexId> {
    [u.clone(), v.clone()].into_iter().collect()
}

fn compressible_with(g: &TreeGroup<'_>) -> Result<Vec<(VertexId, VertexId)>> {
    let mut out = Vec::new();
    for (u, v) in g.tree.explored_edges()? {
        if g.same_orbit(&single(&u), &single(&v))? {
            continue;
        }
        let se = g.stabilizer(&pair(&u, &v))?;
        if se == g.stabilizer(&single(&u))? || se == g.stabilizer(&single(&v))? {
            out.push((u, v));
        }
    }
    Ok(out)
}

/// Edges `uv` with `Γu ≠ Γv` and `Γ_e ∈ {Γ_u, Γ_v}`, sorted.
pub fn compressible_edges(t: &TreeHandle, a: &GroupAction) -> Result<Vec<(VertexId, VertexId)>> {
    compressible_with(&TreeGroup::new(t, a)?)
}

/// For all examined nodes `u, v`: `Γ_u ≤ Γ_v` implies `Γ_u = Γ_v` and `Γu = Γv`.
pub fn is_incompressible(t: &TreeHandle, a: &GroupAction) -> Result<bool> {
    let g = TreeGroup::new(t, a)?;
    let mut nodes = g.nodes.clone();
    if !t.is_finite() {
        // pairs between the domain and its neighbours
        for u in g.nodes.clone() {
            nodes.extend(t.tree.neighbors(&u)?);
        }
        nodes.sort();
        nodes.dedup();
    }
    let stabs: Vec<BTreeSet<Vec<VertexId>>> = nodes.iter().map(|v| g.stabilizer(&single(v))).collect::<Result<_>>()?;
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            if i == j || !stabs[i].is_subset(&stabs[j]) {
                continue;
            }
            if stabs[i] != stabs[j] || !g.same_orbit(&single(&nodes[i]), &single(&nodes[j]))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Result of contracting orbits of compressible edges until none remain.
#[derive(Clone, Debug)]
pub struct CompressionResult {
    pub tree: TreeHandle,
    pub action: GroupAction,
    /// `c: V(T) → V(C(T))`, for finite trees.
    pub classes: Option<BTreeMap<VertexId, VertexId>>,
    /// Contracted edge orbits, in order.
    pub log: Vec<Vec<(VertexId, VertexId)>>,
}

/// `C(T)`: repeatedly contracts the orbit of the least compressible edge.
pub fn contract_compressible(t: &TreeHandle, a: &GroupAction) -> Result<CompressionResult> {
    if !t.is_finite() {
        if compressible_edges(t, a)?.is_empty() {
            return Ok(CompressionResult { tree: t.clone(), action: a.clone(), classes: None, log: Vec::new() });
        }
        return Err(Error::Unsupported("contracting compressible edges of an infinite tree".into()));
    }
    if !a.is_permutation_group() {
        return Err(Error::Unsupported("contraction on a finite tree needs permutation generators".into()));
    }
    let mut tree = t.clone();
    let mut action = a.clone();
    let original = t.tree.vertices().expect("finite tree");
    let mut c: BTreeMap<VertexId, VertexId> = original.iter().map(|v| (v.clone(), v.clone())).collect();
    let mut log = Vec::new();
    loop {
        let g = TreeGroup::new(&tree, &action)?;
        let edges = compressible_with(&g)?;
        let Some((u, v)) = edges.first().cloned() else { break };
        let perms = g.perms.as_ref().expect("finite permutation action");
        let orbit: BTreeSet<(VertexId, VertexId)> =
            perms.iter().map(|p| ordered(g.image(p, &u), g.image(p, &v))).collect();
        let nodes = g.nodes.clone();
        let mut uf = UnionFind::new(nodes.len());
        let idx = |x: &VertexId| nodes.binary_search(x).expect("tree node");
        for (x, y) in &orbit {
            uf.union(idx(x), idx(y));
        }
        let key: Vec<VertexId> = (0..nodes.len()).map(|i| nodes[uf.find(i)].clone()).collect();
        let mut edges_new = BTreeSet::new();
        for x in &nodes {
            for y in tree.tree.neighbors(x)? {
                let (kx, ky) = (key[idx(x)].clone(), key[idx(&y)].clone());
                if kx != ky {
                    edges_new.insert(ordered(kx, ky));
                }
            }
        }
        let new_nodes: BTreeSet<VertexId> = key.iter().cloned().collect();
        let contracted = FiniteGraph::new(tree.tree.name(), new_nodes.iter().cloned(), edges_new)?;
        let mut gens = Vec::new();
        for m in &action.generators {
            let mut map = BTreeMap::new();
            for k in &new_nodes {
                map.insert(k.clone(), key[idx(&m.apply(k)?)].clone());
            }
            gens.push(GraphMorphism::permutation(m.tag(), map)?);
        }
        for v in c.values_mut() {
            *v = key[idx(v)].clone();
        }
        log.push(orbit.into_iter().collect());
        tree = TreeHandle::finite(contracted)?;
        action = GroupAction { generators: gens, budget: action.budget };
    }
    Ok(CompressionResult { tree, action, classes: Some(c), log })
}

/// The decomposition over `C(T)` whose parts are unions of the parts in each fibre of `c`.
pub fn induced_td_after_contraction(td: &TreeDecomposition, cr: &CompressionResult) -> Result<TreeDecomposition> {
    let Some(c) = &cr.classes else {
        if cr.log.is_empty() {
            return Ok(td.clone());
        }
        return Err(Error::Unsupported("contraction map missing".into()));
    };
    let mut parts: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for (s, t) in c {
        parts.entry(t.clone()).or_default().extend(td.part(s)?);
    }
    TreeDecomposition::finite(td.graph.clone(), cr.tree.clone(), parts)
}

/// `(|Γ\E| − |Γ\V|, |Γ\E_1|, |Γ\E_2|, …)` with trailing zeros trimmed.
///
/// Equality and ordering ignore `exact`.
#[derive(Clone, Debug)]
pub struct SizeSequence {
    pub head: i64,
    /// `tail[n - 1]` counts edge orbits whose stabilizer has order `n`.
    pub tail: Vec<usize>,
    /// Whether stabilizer orders were computed exactly.
    pub exact: bool,
}

impl SizeSequence {
    pub fn new(head: i64, tail: Vec<usize>) -> Self {
        let mut s = SizeSequence { head, tail, exact: true };
        s.trim();
        s
    }

    fn trim(&mut self) {
        while self.tail.last() == Some(&0) {
            self.tail.pop();
        }
    }

    pub fn edge_orbits(&self) -> usize {
        self.tail.iter().sum()
    }
}

impl Ord for SizeSequence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.head.cmp(&other.head).then_with(|| {
            let n = self.tail.len().max(other.tail.len());
            for i in 0..n {
                let a = self.tail.get(i).copied().unwrap_or(0);
                let b = other.tail.get(i).copied().unwrap_or(0);
                match a.cmp(&b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialEq for SizeSequence {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SizeSequence {}

impl PartialOrd for SizeSequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SizeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},[", self.head)?;
        for (i, n) in self.tail.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("])")
    }
}

pub fn compare_size(a: &SizeSequence, b: &SizeSequence) -> Ordering {
    a.cmp(b)
}

pub fn size_sequence(t: &TreeHandle, a: &GroupAction) -> Result<SizeSequence> {
    let g = TreeGroup::new(t, a)?;
    let nodes: Vec<BTreeSet<VertexId>> = g.nodes.iter().map(single).collect();
    let vertex_orbits = g.classes(&nodes)?.len();
    let edges: Vec<BTreeSet<VertexId>> = t.explored_edges()?.iter().map(|(u, v)| pair(u, v)).collect();
    let edge_classes = g.classes(&edges)?;
    let mut tail: Vec<usize> = Vec::new();
    for class in &edge_classes {
        let n = g.stabilizer(&edges[class[0]])?.len();
        if tail.len() < n {
            tail.resize(n, 0);
        }
        tail[n - 1] += 1;
    }
    let mut s = SizeSequence::new(edge_classes.len() as i64 - vertex_orbits as i64, tail);
    s.exact = g.exact();
    Ok(s)
}

/// A decomposition's vertex window, for reports.
pub fn part_window(td: &TreeDecomposition, probe_radius: usize) -> Result<BTreeMap<VertexId, BTreeSet<VertexId>>> {
    td.window(probe_radius)?.into_iter().map(|t| Ok((t.clone(), td.part(&t)?))).collect()
}

/// Whether the separation induced at `t1 t2` has the adhesion set as separator.
pub fn separator_matches_adhesion(td: &TreeDecomposition, t1: &VertexId, t2: &VertexId) -> Result<bool> {
    let x = induced_separation(td, t1, t2)?;
    let s: BTreeSet<VertexId> = td.part(t1)?.intersection(&td.part(t2)?).cloned().collect();
    Ok(x.separator() == &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::graph::LineGraph;

    fn ints(xs: &[i64]) -> BTreeSet<VertexId> {
        xs.iter().map(|&i| VertexId::Int(i)).collect()
    }

    fn path_tree(n: usize) -> TreeHandle {
        TreeHandle::finite(FiniteGraph::path(n)).unwrap()
    }

    fn finite_td(g: FiniteGraph, tree: TreeHandle, parts: &[&[i64]]) -> TreeDecomposition {
        let parts = parts.iter().enumerate().map(|(i, p)| (VertexId::Int(i as i64), ints(p))).collect();
        TreeDecomposition::finite(Arc::new(g), tree, parts).unwrap()
    }

    /// Parts `{i, i+1}` on the line, with the part at node 0 optionally cut down to `{0}`.
    fn line_td(broken: bool) -> TreeDecomposition {
        let part: PartFn = Arc::new(move |t: &VertexId| {
            let i = t.int().ok_or_else(|| Error::InvalidVertex(t.clone()))?;
            Ok(if broken && i == 0 { ints(&[0]) } else { ints(&[i, i + 1]) })
        });
        let nodes_of: NodesFn = Arc::new(move |v: &VertexId| {
            let i = v.int().ok_or_else(|| Error::InvalidVertex(v.clone()))?;
            let mut out = vec![VertexId::Int(i - 1), VertexId::Int(i)];
            if broken && i == 1 {
                out.remove(0);
            }
            Ok(out)
        });
        TreeDecomposition {
            graph: Arc::new(LineGraph),
            tree: TreeHandle::lazy(Arc::new(LineGraph), vec![VertexId::Int(0)]).unwrap(),
            parts: Parts::Lazy { part, nodes_of },
            adhesion_bound: Some(1),
        }
    }

    #[test]
    fn line_intervals_form_a_valid_td() {
        assert_eq!(validate_td(&line_td(false), 6).unwrap(), None);
        assert_eq!(
            validate_td(&line_td(true), 6).unwrap(),
            Some(TdViolation::Edge(VertexId::Int(0), VertexId::Int(1)))
        );
    }

    #[test]
    fn misplaced_middle_part_breaks_t3() {
        let g = FiniteGraph::from_edges("P4", 4, &[(0, 1), (1, 2), (2, 3)])
            .unwrap();
        // vertices 1..=4 relabelled to 0..=3: parts {1,2},{3,4},{2,3}
        let td = finite_td(g, path_tree(3), &[&[0, 1], &[2, 3], &[1, 2]]);
        match validate_td(&td, 0).unwrap() {
            Some(TdViolation::Subtree { vertex, t2, .. }) => {
                assert_eq!(vertex, VertexId::Int(1));
                assert_eq!(t2, VertexId::Int(1));
            }
            other => panic!("expected a subtree violation, got {other:?}"),
        }
    }

    #[test]
    fn adhesion_and_induced_separations() {
        let rep = adhesion_sets(&line_td(false), 4).unwrap();
        assert!(rep.sets.iter().all(|((t, _), s)| s == &ints(&[t.int().unwrap() + 1])));
        assert!(rep.finite_adhesion);
        let x = induced_separation(&line_td(false), &VertexId::Int(0), &VertexId::Int(1)).unwrap();
        assert_eq!(x.separator(), &ints(&[1]));
        assert!(x.in_a(&VertexId::Int(-7)).unwrap() && x.in_b(&VertexId::Int(9)).unwrap());

        let p3 = finite_td(FiniteGraph::path(3), path_tree(2), &[&[0, 1], &[1, 2]]);
        assert_eq!(adhesion_sets(&p3, 0).unwrap().sets.values().next().unwrap(), &ints(&[1]));
        let y = induced_separation(&p3, &VertexId::Int(0), &VertexId::Int(1)).unwrap();
        assert_eq!(y.sides().unwrap(), (ints(&[0, 1]), ints(&[1, 2])));

        let star = TreeHandle::finite(FiniteGraph::path(3)).unwrap();
        let k13 = finite_td(FiniteGraph::star(3), star, &[&[0, 1], &[0, 2], &[0, 3]]);
        let z = induced_separation(&k13, &VertexId::Int(0), &VertexId::Int(1)).unwrap();
        assert_eq!(z.order(), 1);
        assert_eq!(z.sides().unwrap().0, ints(&[0, 1]));
    }

    #[test]
    fn invariance_of_line_decompositions() {
        let shift = families::line_translations();
        assert!(is_invariant(&line_td(false), &shift, 5).unwrap().invariant);
        assert!(is_invariant(&line_td(false), &GroupAction::trivial(), 5).unwrap().invariant);
        let part: PartFn = Arc::new(|t: &VertexId| {
            let i = t.int().unwrap();
            Ok(ints(&[2 * i, 2 * i + 1, 2 * i + 2]))
        });
        let nodes_of: NodesFn = Arc::new(|v: &VertexId| {
            let i = v.int().unwrap();
            Ok(if i % 2 == 0 { vec![VertexId::Int(i / 2 - 1), VertexId::Int(i / 2)] } else { vec![VertexId::Int(i.div_euclid(2))] })
        });
        let wide = TreeDecomposition {
            graph: Arc::new(LineGraph),
            tree: TreeHandle::lazy(Arc::new(LineGraph), vec![VertexId::Int(0)]).unwrap(),
            parts: Parts::Lazy { part, nodes_of },
            adhesion_bound: Some(1),
        };
        assert_eq!(validate_td(&wide, 5).unwrap(), None);
        let rep = is_invariant(&wide, &shift, 5).unwrap();
        assert!(!rep.invariant && rep.witness.is_some());
    }

    #[test]
    fn refinement_checks() {
        let fine = finite_td(FiniteGraph::path(5), path_tree(4), &[&[0, 1], &[1, 2], &[2, 3], &[3, 4]]);
        let id: BTreeMap<VertexId, VertexId> = (0..4).map(|i| (VertexId::Int(i), VertexId::Int(i))).collect();
        assert!(is_refinement(&fine, &fine, &id).unwrap());
        let coarse = finite_td(FiniteGraph::path(5), path_tree(2), &[&[0, 1], &[1, 2, 3, 4]]);
        let cover: BTreeMap<VertexId, VertexId> =
            [(0, 0), (1, 1), (2, 1), (3, 1)].iter().map(|&(a, b)| (VertexId::Int(a), VertexId::Int(b))).collect();
        assert!(is_refinement(&fine, &coarse, &cover).unwrap());
        let bad: BTreeMap<VertexId, VertexId> =
            [(0, 0), (1, 1), (2, 0), (3, 1)].iter().map(|&(a, b)| (VertexId::Int(a), VertexId::Int(b))).collect();
        assert!(is_refinement(&fine, &coarse, &bad).is_err());
    }

    #[test]
    fn compressibility_examples() {
        let trivial = GroupAction::trivial();
        assert_eq!(compressible_edges(&path_tree(3), &trivial).unwrap().len(), 2);
        let swap = GroupAction::new(vec![GraphMorphism::from_pairs("swap", &[(0, 1), (1, 0)]).unwrap()]);
        assert!(compressible_edges(&path_tree(2), &swap).unwrap().is_empty());
        let line = TreeHandle::lazy(Arc::new(LineGraph), vec![VertexId::Int(0)]).unwrap();
        let shift = families::line_translations();
        assert!(compressible_edges(&line, &shift).unwrap().is_empty());
        assert!(is_incompressible(&line, &shift).unwrap());
        assert!(!is_incompressible(&path_tree(2), &trivial).unwrap());
        assert!(is_incompressible(&path_tree(1), &swap).unwrap());
    }

    #[test]
    fn contraction_examples() {
        let trivial = GroupAction::trivial();
        let star = TreeHandle::finite(FiniteGraph::star(3)).unwrap();
        let cr = contract_compressible(&star, &trivial).unwrap();
        assert_eq!(cr.tree.tree.vertices().unwrap().len(), 1);
        assert_eq!(cr.log.len(), 3);
        assert!(is_incompressible(&cr.tree, &cr.action).unwrap());

        let line = TreeHandle::lazy(Arc::new(LineGraph), vec![VertexId::Int(0)]).unwrap();
        assert!(contract_compressible(&line, &families::line_translations()).unwrap().log.is_empty());

        let p3 = finite_td(FiniteGraph::path(3), path_tree(2), &[&[0, 1], &[1, 2]]);
        let cr = contract_compressible(&p3.tree, &trivial).unwrap();
        let merged = induced_td_after_contraction(&p3, &cr).unwrap();
        assert_eq!(part_window(&merged, 0).unwrap().into_values().collect::<Vec<_>>(), vec![ints(&[0, 1, 2])]);
        assert_eq!(validate_td(&merged, 0).unwrap(), None);
    }

    #[test]
    fn size_sequence_examples() {
        let line = TreeHandle::lazy(Arc::new(LineGraph), vec![VertexId::Int(0)]).unwrap();
        assert_eq!(size_sequence(&line, &families::line_translations()).unwrap(), SizeSequence::new(0, vec![1]));
        let trivial = GroupAction::trivial();
        assert_eq!(size_sequence(&path_tree(2), &trivial).unwrap(), SizeSequence::new(-1, vec![1]));
        assert_eq!(size_sequence(&path_tree(3), &trivial).unwrap(), SizeSequence::new(-1, vec![2]));
    }

    #[test]
    fn size_comparisons() {
        let s = |h, t: &[usize]| SizeSequence::new(h, t.to_vec());
        assert_eq!(compare_size(&s(0, &[1]), &s(-1, &[5])), Ordering::Greater);
        assert_eq!(compare_size(&s(0, &[1]), &s(0, &[1])), Ordering::Equal);
        assert_eq!(compare_size(&s(0, &[1, 2]), &s(0, &[1, 3])), Ordering::Less);
        assert_eq!(compare_size(&s(0, &[1, 0]), &s(0, &[1])), Ordering::Equal);
    }
}
