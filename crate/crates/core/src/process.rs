//! Factorisations and processes of splittings.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::amalgam::{
    amalgam_distinguishes_ends, classify_type, connecting_tree, construct_amalgam, is_trivial, lifted_action,
    Amalgam, AmalgamSpec, AmalgamType, FactorSpec,
};
use crate::catalog;
use crate::error::{Error, Result};
use crate::explore::ball_around;
use crate::families;
use crate::graph::{FiniteGraph, Graph, GraphHandle};
use crate::group::{GraphMorphism, GroupAction};
use crate::iso::balls_isomorphic;
use crate::separation::end_proxies;
use crate::tree_decomp::{
    contract_compressible, size_sequence, tree_path, NodesFn, PartFn, Parts, SizeSequence, TreeDecomposition,
};
use crate::vertex::VertexId;

/// A graph of a factorisation with its declared action.
#[derive(Clone, Debug)]
pub struct Factor {
    pub label: String,
    pub graph: GraphHandle,
    pub action: GroupAction,
}

impl Factor {
    pub fn new(label: impl Into<String>, graph: GraphHandle, action: GroupAction) -> Self {
        Factor { label: label.into(), graph, action }
    }

    /// A built-in family, labelled by its name.
    pub fn family(name: &str) -> Result<Self> {
        let (graph, action) = families::by_name(name)?;
        Ok(Factor::new(name, graph, action))
    }

    fn from_spec(f: &FactorSpec) -> Self {
        Factor::new(f.graph.name(), Arc::new(f.graph.clone()), f.action.clone())
    }
}

/// How one factor was split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub step: usize,
    pub factor: String,
    pub spec: String,
    pub kind: AmalgamType,
    pub children: [String; 2],
}

#[derive(Clone, Debug)]
pub struct Factorisation {
    pub factors: Vec<Factor>,
    pub structure: Vec<SplitRecord>,
}

impl Factorisation {
    pub fn single(f: Factor) -> Self {
        Factorisation { factors: vec![f], structure: Vec::new() }
    }

    pub fn labels(&self) -> Vec<String> {
        self.factors.iter().map(|f| f.label.clone()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProcessConfig {
    /// Radius of the ball comparison between a factor and a proposed amalgam.
    pub iso_radius: usize,
    /// Resolution of end proxies.
    pub resolution: usize,
    /// Word budget for respect and consistency checks.
    pub budget: usize,
    /// Word budget for stabilizers of the lifted tree action.
    pub tree_budget: usize,
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig { iso_radius: 8, resolution: 4, budget: 6, tree_budget: 4 }
    }
}

#[derive(Clone, Debug)]
pub enum RejectReason {
    NoSuchFactor,
    Invalid(Error),
    Trivial,
    InfiniteIdentification(Error),
    NotRespectful,
    NotReproducing { radius: usize },
    NoEndDistinction { resolution: usize },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NoSuchFactor => f.write_str("no such factor"),
            RejectReason::Invalid(e) => write!(f, "invalid spec: {e}"),
            RejectReason::Trivial => f.write_str("amalgamation is trivial"),
            RejectReason::InfiniteIdentification(e) => write!(f, "identification not finite: {e}"),
            RejectReason::NotRespectful => f.write_str("neither Type 1 nor Type 2 under the declared action"),
            RejectReason::NotReproducing { radius } => write!(f, "amalgam differs from the factor within radius {radius}"),
            RejectReason::NoEndDistinction { resolution } => {
                write!(f, "distinguishes no ends at resolution {resolution}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rejection {
    pub step: usize,
    pub factor: usize,
    pub spec: String,
    pub reason: RejectReason,
}

#[derive(Clone, Debug)]
pub struct ProcessState {
    pub factorisation: Factorisation,
    pub steps: usize,
    /// Size sequences of the compressed connecting trees; the first entry
    /// belongs to the one-node tree of the unsplit graph.
    pub sizes: Vec<SizeSequence>,
    pub rejections: Vec<Rejection>,
    pub config: ProcessConfig,
}

impl ProcessState {
    pub fn new(initial: Factor, config: ProcessConfig) -> Self {
        ProcessState {
            factorisation: Factorisation::single(initial),
            steps: 0,
            sizes: vec![SizeSequence::new(-1, Vec::new())],
            rejections: Vec::new(),
            config,
        }
    }
}

fn reproduces(a: &Amalgam, f: &Factor, radius: usize) -> Result<bool> {
    let mine = ball_around(a.graph.as_ref(), &a.graph.root(), radius)?;
    let theirs = ball_around(f.graph.as_ref(), &f.graph.root(), radius)?;
    Ok(balls_isomorphic(&mine, &theirs))
}

/// Size sequence of the compressed connecting tree under the lifted action.
pub fn amalgam_size(a: &Amalgam, tree_budget: usize) -> Result<SizeSequence> {
    let tree = connecting_tree(a)?;
    let action = lifted_action(a)?.tree_action.with_budget(tree_budget);
    let cr = contract_compressible(&tree, &action)?;
    size_sequence(&cr.tree, &cr.action)
}

/// Replaces factor `index` by the two factors of `spec`, after checking
/// every condition of a splitting.
pub fn split_step(st: &ProcessState, index: usize, spec: &AmalgamSpec) -> core::result::Result<ProcessState, Rejection> {
    let reject = |reason| Rejection { step: st.steps, factor: index, spec: spec.name.clone(), reason };
    let cfg = st.config;
    let factor = st.factorisation.factors.get(index).ok_or_else(|| reject(RejectReason::NoSuchFactor))?;
    let a = construct_amalgam(spec).map_err(|e| reject(RejectReason::Invalid(e)))?;
    if is_trivial(&a).map_err(|e| reject(RejectReason::Invalid(e)))? {
        return Err(reject(RejectReason::Trivial));
    }
    a.max_identification().map_err(|e| reject(RejectReason::InfiniteIdentification(e)))?;
    let report = classify_type(&a, cfg.budget);
    if report.kind == AmalgamType::Neither {
        return Err(reject(RejectReason::NotRespectful));
    }
    if !reproduces(&a, factor, cfg.iso_radius).map_err(|e| reject(RejectReason::Invalid(e)))? {
        return Err(reject(RejectReason::NotReproducing { radius: cfg.iso_radius }));
    }
    if !amalgam_distinguishes_ends(&a, cfg.resolution).map_err(|e| reject(RejectReason::Invalid(e)))? {
        return Err(reject(RejectReason::NoEndDistinction { resolution: cfg.resolution }));
    }
    let size = amalgam_size(&a, cfg.tree_budget).map_err(|e| reject(RejectReason::Invalid(e)))?;
    let children = [Factor::from_spec(&spec.factors[0]), Factor::from_spec(&spec.factors[1])];
    let mut next = st.clone();
    next.factorisation.structure.push(SplitRecord {
        step: st.steps,
        factor: factor.label.clone(),
        spec: spec.name.clone(),
        kind: report.kind,
        children: [children[0].label.clone(), children[1].label.clone()],
    });
    next.factorisation.factors.splice(index..=index, children);
    next.steps += 1;
    next.sizes.push(size);
    Ok(next)
}

/// Every factor has at most one end proxy at resolutions `r` and `r + 2`.
///
/// Fails with [`Error::Indeterminate`] when some component could not be
/// classified as finite or infinite.
pub fn is_terminal(f: &Factorisation, r: usize) -> Result<bool> {
    let mut terminal = true;
    for factor in &f.factors {
        for radius in [r, r + 2] {
            let report = end_proxies(&factor.graph, radius)?;
            if !report.warnings.is_empty() {
                return Err(Error::Indeterminate(format!("{}: {}", factor.label, report.warnings.join("; "))));
            }
            if report.proxies.len() > 1 {
                terminal = false;
            }
        }
    }
    Ok(terminal)
}

/// Picks the next split, or `None` to give up.
pub trait Driver {
    fn name(&self) -> &str;
    fn choose(&mut self, st: &ProcessState) -> Option<(usize, AmalgamSpec)>;
}

/// Splits the first factor whose label has an entry in the table and which
/// has not been rejected with that spec.
#[derive(Clone, Debug)]
pub struct TableDriver {
    pub name: String,
    pub table: Vec<(String, AmalgamSpec)>,
}

impl TableDriver {
    pub fn new(name: impl Into<String>, table: Vec<(&str, AmalgamSpec)>) -> Self {
        TableDriver { name: name.into(), table: table.into_iter().map(|(l, s)| (l.to_string(), s)).collect() }
    }
}

impl Driver for TableDriver {
    fn name(&self) -> &str {
        &self.name
    }

    fn choose(&mut self, st: &ProcessState) -> Option<(usize, AmalgamSpec)> {
        for (i, f) in st.factorisation.factors.iter().enumerate() {
            for (label, spec) in &self.table {
                let tried = st.rejections.iter().any(|r| r.factor == i && r.spec == spec.name && r.step == st.steps);
                if *label == f.label && !tried {
                    return Some((i, spec.clone()));
                }
            }
        }
        None
    }
}

/// Driver strategies shipped for a built-in family.
pub fn shipped_drivers(family: &str) -> Vec<TableDriver> {
    match family {
        "line" => vec![
            TableDriver::new("double-ray", vec![("line", catalog::double_ray())]),
            TableDriver::new("path3", vec![("line", catalog::path3_line())]),
            TableDriver::new("star-path", vec![("line", catalog::star_path(2))]),
        ],
        "tree(3)" => vec![
            TableDriver::new("star-path", vec![("tree(3)", catalog::star_path(3))]),
            TableDriver::new("star-edges", vec![("tree(3)", catalog::star_edges())]),
        ],
        "ladder" => vec![
            TableDriver::new("square", vec![("ladder", catalog::square_ladder())]),
            TableDriver::new("domino", vec![("ladder", catalog::domino_ladder())]),
        ],
        _ => vec![TableDriver::new("none", Vec::new()), TableDriver::new("double-ray", vec![("line", catalog::double_ray())])],
    }
}

/// Rejections in a row after which the process counts as stalled.
pub const MAX_REJECTIONS: usize = 3;

#[derive(Clone, Debug)]
pub enum ProcessOutcome {
    Terminated { steps: usize, state: ProcessState },
    BudgetExceeded(ProcessState),
    Stalled(ProcessState),
}

impl ProcessOutcome {
    pub fn state(&self) -> &ProcessState {
        match self {
            ProcessOutcome::Terminated { state, .. } | ProcessOutcome::BudgetExceeded(state) | ProcessOutcome::Stalled(state) => {
                state
            }
        }
    }

    pub fn terminated(&self) -> bool {
        matches!(self, ProcessOutcome::Terminated { .. })
    }
}

pub fn run_process(initial: Factor, driver: &mut dyn Driver, max_steps: usize, config: ProcessConfig) -> Result<ProcessOutcome> {
    let mut st = ProcessState::new(initial, config);
    loop {
        if is_terminal(&st.factorisation, config.resolution)? {
            return Ok(ProcessOutcome::Terminated { steps: st.steps, state: st });
        }
        if st.steps >= max_steps {
            return Ok(ProcessOutcome::BudgetExceeded(st));
        }
        let mut rejected = 0;
        loop {
            let Some((i, spec)) = driver.choose(&st) else { return Ok(ProcessOutcome::Stalled(st)) };
            match split_step(&st, i, &spec) {
                Ok(next) => {
                    st = next;
                    break;
                }
                Err(r) => {
                    st.rejections.push(r);
                    rejected += 1;
                    if rejected >= MAX_REJECTIONS {
                        return Ok(ProcessOutcome::Stalled(st));
                    }
                }
            }
        }
    }
}

/// One comparison of consecutive size sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeComparison {
    pub from: SizeSequence,
    pub to: SizeSequence,
    pub ordering: Ordering,
    /// Growth was not strict.
    pub anomaly: bool,
}

pub fn size_trace_report(st: &ProcessState) -> Vec<SizeComparison> {
    st.sizes
        .windows(2)
        .map(|w| {
            let ordering = w[1].cmp(&w[0]);
            SizeComparison { from: w[0].clone(), to: w[1].clone(), ordering, anomaly: ordering != Ordering::Greater }
        })
        .collect()
}

/// A finite graph `G2` with `G1 ∗ G2` a factorisation of the same graph.
#[derive(Clone, Debug)]
pub struct NiceComplement {
    pub graph: FiniteGraph,
    /// The amalgam classes behind the vertices `0, 1, …` of `graph`.
    pub classes: Vec<VertexId>,
    /// The new amalgamation, when `S' = S` and the adhesion sets of `G1`
    /// lie in one orbit of its declared action.
    pub spec: Option<AmalgamSpec>,
}

/// Builds `G2` from an automorphism `phi` of the amalgam that swaps the root
/// copy with its neighbour along `label` and fixes the adhesion set there.
pub fn nice_finite_complement(
    a: &Amalgam,
    label: u32,
    phi: &GraphMorphism,
    s_prime: &BTreeSet<VertexId>,
) -> Result<NiceComplement> {
    let spec = a.spec();
    let g1 = &spec.factors[0].graph;
    let s = spec.factors[0]
        .adhesion
        .get(&label)
        .ok_or_else(|| Error::Domain(format!("{label} is not a label of the first factor")))?;
    let s_set: BTreeSet<VertexId> = s.iter().cloned().collect();
    if !s_set.is_subset(s_prime) || s_prime.iter().any(|v| !g1.contains(v)) {
        return Err(Error::Domain("S' must be a vertex set of the first factor containing S".into()));
    }
    if !g1.induced("S'", s_prime)?.is_connected() {
        return Err(Error::Domain("S' is not connected".into()));
    }
    let root = a.tree.root();
    let next = a.node(&[label])?;
    let pi = |node: &VertexId, xs: &BTreeSet<VertexId>| -> Result<BTreeSet<VertexId>> {
        xs.iter().map(|x| a.class_of(node, x)).collect()
    };
    let image = |xs: &BTreeSet<VertexId>| -> Result<BTreeSet<VertexId>> { xs.iter().map(|x| phi.apply(x)).collect() };
    let pi_s = pi(&root, &s_set)?;
    if image(&pi_s)? != pi_s {
        return Err(Error::Domain("the automorphism does not fix the adhesion set".into()));
    }
    let (u_part, v_part) = (a.part(&root)?, a.part(&next)?);
    if image(&u_part)? != v_part || image(&v_part)? != u_part {
        return Err(Error::Domain("the automorphism does not invert the tree edge".into()));
    }
    let keep: BTreeSet<VertexId> = if s_prime.len() == g1.len() {
        u_part.union(&v_part).cloned().collect()
    } else {
        let p = pi(&root, s_prime)?;
        let q = image(&p)?;
        p.union(&q).cloned().collect()
    };
    let classes: Vec<VertexId> = keep.iter().cloned().collect();
    let index = |v: &VertexId| classes.binary_search(v).map(|i| i as i64);
    let mut edges = Vec::new();
    for (i, v) in classes.iter().enumerate() {
        for u in a.graph.neighbors(v)? {
            if let Ok(j) = index(&u) {
                if (i as i64) < j {
                    edges.push((i as i64, j));
                }
            }
        }
    }
    let graph = FiniteGraph::from_edges(format!("complement[{}]", spec.name), classes.len(), &edges)?;
    let respec = if *s_prime == s_set { respecify(a, phi, &s_set, &classes, &graph)? } else { None };
    Ok(NiceComplement { graph, classes, spec: respec })
}

fn respecify(
    a: &Amalgam,
    phi: &GraphMorphism,
    s: &BTreeSet<VertexId>,
    classes: &[VertexId],
    g2: &FiniteGraph,
) -> Result<Option<AmalgamSpec>> {
    let spec = a.spec();
    let f1 = &spec.factors[0];
    let root = a.tree.root();
    let local = |c: &VertexId| VertexId::Int(classes.binary_search(c).expect("class of G2") as i64);
    let top = *f1.adhesion.keys().last().unwrap();
    let (m1, m2) = (top + 1, top + 2);
    let mut base: BTreeMap<VertexId, (VertexId, VertexId)> = BTreeMap::new();
    for x in s {
        let c = a.class_of(&root, x)?;
        base.insert(x.clone(), (local(&c), local(&phi.apply(&c)?)));
    }
    let mut bonding = BTreeMap::new();
    let points = f1.graph.vertex_list().to_vec();
    let elements = f1.action.elements_exact(&points)?;
    for (k, sk) in &f1.adhesion {
        let target: BTreeSet<VertexId> = sk.iter().cloned().collect();
        let found = elements.iter().find(|(w, _)| f1.action.apply_set(w, &target).ok().as_ref() == Some(s));
        let Some((w, _)) = found else { return Ok(None) };
        let (mut p1, mut p2) = (Vec::new(), Vec::new());
        for x in sk {
            let (y1, y2) = base[&f1.action.apply_word(w, x)?].clone();
            p1.push((x.clone(), y1));
            p2.push((x.clone(), y2));
        }
        bonding.insert((*k, m1), p1);
        bonding.insert((*k, m2), p2);
    }
    let all: Vec<VertexId> = g2.vertex_list().to_vec();
    let mut swap = BTreeMap::new();
    for c in classes {
        swap.insert(local(c), local(&phi.apply(c)?));
    }
    let gens = if swap.iter().all(|(x, y)| x == y) {
        Vec::new()
    } else {
        vec![GraphMorphism::permutation("phi", swap)?]
    };
    let f2 = FactorSpec {
        graph: g2.clone(),
        adhesion: [(m1, all.clone()), (m2, all)].into_iter().collect(),
        action: GroupAction::new(gens),
    };
    Ok(Some(AmalgamSpec {
        name: format!("{}-complement", spec.name),
        factors: [f1.clone(), f2],
        bonding,
        type2: None,
    }))
}

/// The decomposition with parts `V_t ∪ ⋃{α(S) : t ∈ α(T_S)}`, where `T_S` is
/// the least subtree meeting every node whose part meets `s`, and `α` runs
/// over words of length at most `budget`.
///
/// Fails with [`Error::Budget`] when raising the budget by two still changes
/// the enlarged part at the root.
pub fn enlarge_parts(td: &TreeDecomposition, s: &BTreeSet<VertexId>, action: &GroupAction, budget: usize) -> Result<TreeDecomposition> {
    if s.is_empty() {
        return Ok(td.clone());
    }
    let root = td.tree.root.clone();
    let sample = |depth: usize| -> Result<Vec<(BTreeSet<VertexId>, BTreeSet<VertexId>)>> {
        action.set_orbit(s, depth)?.into_keys().map(|x| Ok((subtree_meeting(td, &x)?, x))).collect()
    };
    let images = Arc::new(sample(budget)?);
    let extra = |images: &[(BTreeSet<VertexId>, BTreeSet<VertexId>)], t: &VertexId| -> BTreeSet<VertexId> {
        images.iter().filter(|(nodes, _)| nodes.contains(t)).flat_map(|(_, x)| x.iter().cloned()).collect()
    };
    if !action.is_trivial() && extra(&images, &root) != extra(&sample(budget + 2)?, &root) {
        return Err(Error::Budget(format!("enlarged parts not stable at word budget {budget}")));
    }
    let base = td.clone();
    let imgs = images.clone();
    let part: PartFn = Arc::new(move |t: &VertexId| {
        let mut p = base.part(t)?;
        p.extend(imgs.iter().filter(|(nodes, _)| nodes.contains(t)).flat_map(|(_, x)| x.iter().cloned()));
        Ok(p)
    });
    let base = td.clone();
    let nodes_of: NodesFn = Arc::new(move |v: &VertexId| {
        let mut ns: BTreeSet<VertexId> = base.nodes_of(v)?.into_iter().collect();
        for (nodes, x) in images.iter() {
            if x.contains(v) {
                ns.extend(nodes.iter().cloned());
            }
        }
        Ok(ns.into_iter().collect())
    });
    let parts = Parts::Lazy { part, nodes_of };
    let adhesion_bound = td.adhesion_bound.map(|b| b + s.len() * 2);
    if td.is_finite() {
        let lazy = TreeDecomposition { graph: td.graph.clone(), tree: td.tree.clone(), parts, adhesion_bound };
        let explicit: BTreeMap<VertexId, BTreeSet<VertexId>> =
            td.tree.explored_nodes()?.into_iter().map(|t| Ok((t.clone(), lazy.part(&t)?))).collect::<Result<_>>()?;
        return TreeDecomposition::finite(td.graph.clone(), td.tree.clone(), explicit);
    }
    Ok(TreeDecomposition { graph: td.graph.clone(), tree: td.tree.clone(), parts, adhesion_bound })
}

/// Least subtree containing every node whose part meets `x`.
fn subtree_meeting(td: &TreeDecomposition, x: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
    let mut nodes: BTreeSet<VertexId> = BTreeSet::new();
    for v in x {
        nodes.extend(td.nodes_of(v)?);
    }
    let Some(first) = nodes.iter().next().cloned() else { return Ok(nodes) };
    let mut out = BTreeSet::new();
    for t in &nodes {
        out.extend(tree_path(td.tree.tree.as_ref(), &first, t)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::ball_around;
    use crate::tree_decomp::{is_invariant, validate_td};

    fn line() -> Factor {
        Factor::family("line").unwrap()
    }

    fn cfg() -> ProcessConfig {
        ProcessConfig::default()
    }

    fn shift_of(a: &Amalgam) -> GraphMorphism {
        let lifted = lifted_action(a).unwrap();
        lifted.graph_action.generators.into_iter().find(|g| g.tag() == "shift").unwrap()
    }

    #[test]
    fn line_splits_into_two_edges() {
        let st = ProcessState::new(line(), cfg());
        let next = split_step(&st, 0, &catalog::double_ray()).unwrap();
        assert_eq!(next.steps, 1);
        assert_eq!(next.factorisation.labels(), ["P2", "P2"]);
        assert_eq!(next.factorisation.structure[0].kind, AmalgamType::Type1);
        assert!(is_terminal(&next.factorisation, 4).unwrap());
        let report = size_trace_report(&next);
        assert_eq!(report.len(), 1);
        assert!(!report[0].anomaly);
    }

    #[test]
    fn bad_splits_are_rejected() {
        let st = ProcessState::new(line(), cfg());
        let r = split_step(&st, 0, &catalog::trivial_square()).unwrap_err();
        assert!(matches!(r.reason, RejectReason::Trivial));
        let r = split_step(&st, 0, &catalog::double_ray_asymmetric()).unwrap_err();
        assert!(matches!(r.reason, RejectReason::NotRespectful));
        let r = split_step(&st, 0, &catalog::square_ladder()).unwrap_err();
        assert!(matches!(r.reason, RejectReason::NotReproducing { .. }));
        let r = split_step(&st, 3, &catalog::double_ray()).unwrap_err();
        assert!(matches!(r.reason, RejectReason::NoSuchFactor));
    }

    #[test]
    fn split_without_end_distinction_is_rejected() {
        let c4 = Factor::new("C4", Arc::new(FiniteGraph::cycle(4)), GroupAction::trivial());
        let st = ProcessState::new(c4, cfg());
        let r = split_step(&st, 0, &catalog::path_square()).unwrap_err();
        assert!(matches!(r.reason, RejectReason::NoEndDistinction { .. }), "{}", r.reason);
    }

    #[test]
    fn terminality() {
        let p2 = Factor::new("P2", Arc::new(FiniteGraph::path(2)), GroupAction::trivial());
        let two = Factorisation { factors: vec![p2.clone(), p2], structure: Vec::new() };
        assert!(is_terminal(&two, 3).unwrap());
        assert!(!is_terminal(&Factorisation::single(line()), 3).unwrap());
        assert!(is_terminal(&Factorisation::single(Factor::family("grid2d").unwrap()), 3).unwrap());
    }

    #[test]
    fn process_outcomes() {
        let mut d = shipped_drivers("line").remove(0);
        let out = run_process(line(), &mut d, 5, cfg()).unwrap();
        assert!(matches!(out, ProcessOutcome::Terminated { steps: 1, .. }));
        let out = run_process(Factor::family("grid2d").unwrap(), &mut d, 5, cfg()).unwrap();
        assert!(matches!(out, ProcessOutcome::Terminated { steps: 0, .. }));
        let out = run_process(line(), &mut d, 0, cfg()).unwrap();
        assert!(matches!(out, ProcessOutcome::BudgetExceeded(_)));
        let mut empty = TableDriver::new("none", Vec::new());
        assert!(matches!(run_process(line(), &mut empty, 5, cfg()).unwrap(), ProcessOutcome::Stalled(_)));
        let mut bad = TableDriver::new("bad", vec![("line", catalog::trivial_square())]);
        let out = run_process(line(), &mut bad, 5, cfg()).unwrap();
        assert!(matches!(out, ProcessOutcome::Stalled(_)));
        assert_eq!(out.state().rejections.len(), 1);
    }

    #[test]
    fn size_traces() {
        let st = ProcessState::new(line(), cfg());
        assert!(size_trace_report(&st).is_empty());
        let mut same = st.clone();
        same.sizes.push(same.sizes[0].clone());
        assert!(size_trace_report(&same)[0].anomaly);
    }

    #[test]
    fn complement_of_the_double_ray() {
        let a = construct_amalgam(&catalog::double_ray()).unwrap();
        let phi = shift_of(&a);
        let s: BTreeSet<VertexId> = [VertexId::Int(0)].into_iter().collect();
        let nc = nice_finite_complement(&a, 1, &phi, &s).unwrap();
        assert_eq!(nc.graph.len(), 1);
        let b = construct_amalgam(&nc.spec.unwrap()).unwrap();
        let line = crate::graph::LineGraph;
        for r in [2, 5] {
            let mine = ball_around(b.graph.as_ref(), &b.graph.root(), r).unwrap();
            assert!(balls_isomorphic(&mine, &ball_around(&line, &VertexId::Int(0), r).unwrap()));
        }
        let all: BTreeSet<VertexId> = [VertexId::Int(0), VertexId::Int(1)].into_iter().collect();
        let nc = nice_finite_complement(&a, 1, &phi, &all).unwrap();
        assert_eq!((nc.graph.len(), nc.graph.edge_count()), (3, 2));
        assert!(nc.spec.is_none());
    }

    #[test]
    fn complement_needs_an_inverting_automorphism() {
        let a = construct_amalgam(&catalog::double_ray()).unwrap();
        let lifted = lifted_action(&a).unwrap();
        let s: BTreeSet<VertexId> = [VertexId::Int(0)].into_iter().collect();
        let flip = lifted.graph_action.generators.iter().find(|g| g.tag() != "shift").unwrap();
        assert!(matches!(nice_finite_complement(&a, 1, flip, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn enlarged_line_parts() {
        let td = catalog::line_interval_td(1).unwrap();
        let s: BTreeSet<VertexId> = [VertexId::Int(0), VertexId::Int(3)].into_iter().collect();
        let action = families::line_action();
        let big = enlarge_parts(&td, &s, &action, 10).unwrap();
        assert_eq!(validate_td(&big, 3).unwrap(), None);
        assert!(is_invariant(&big, &action, 2).unwrap().invariant);
        assert!(big.window(2).unwrap().iter().any(|t| big.part(t).unwrap().is_superset(&s)));
        let inside: BTreeSet<VertexId> = [VertexId::Int(0)].into_iter().collect();
        let same = enlarge_parts(&td, &inside, &action, 10).unwrap();
        for t in td.window(3).unwrap() {
            assert_eq!(same.part(&t).unwrap(), td.part(&t).unwrap());
        }
    }

    #[test]
    fn enlarged_finite_parts() {
        let g = Arc::new(FiniteGraph::path(4));
        let tree = crate::tree_decomp::TreeHandle::finite(FiniteGraph::path(3)).unwrap();
        let parts = (0..3i64)
            .map(|i| (VertexId::Int(i), [VertexId::Int(i), VertexId::Int(i + 1)].into_iter().collect()))
            .collect();
        let td = TreeDecomposition::finite(g, tree, parts).unwrap();
        let s: BTreeSet<VertexId> = [VertexId::Int(0), VertexId::Int(1)].into_iter().collect();
        let big = enlarge_parts(&td, &s, &GroupAction::trivial(), 4).unwrap();
        assert_eq!(validate_td(&big, 0).unwrap(), None);
        let sizes: Vec<usize> = (0..3).map(|i| big.part(&VertexId::Int(i)).unwrap().len()).collect();
        assert_eq!(sizes, [2, 3, 2]);
    }
}
