//! Finite-order separations, their semiring operations, tightness and
//! decomposition into tight separations.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::explore::{self, ComponentHandle, Finiteness};
use crate::graph::{check_vertex, same_graph, GraphHandle};
use crate::group::{GroupAction, Word};
use crate::vertex::VertexId;

/// Cap for component exploration on graphs without a hull oracle.
pub const EXPLORE_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

/// Where a vertex sits relative to a separation `(A, B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Separator,
    /// In `A ∖ B`.
    A,
    /// In `B ∖ A`.
    B,
}

/// A separation `(A, B)` of finite order, stored as its separator `A ∩ B`
/// and the side of every component of `G − (A ∩ B)`.
#[derive(Clone)]
pub struct Separation {
    graph: GraphHandle,
    separator: BTreeSet<VertexId>,
    a_side: Vec<ComponentHandle>,
    b_side: Vec<ComponentHandle>,
}

impl PartialEq for Separation {
    fn eq(&self, other: &Self) -> bool {
        same_graph(&self.graph, &other.graph) && self.key() == other.key()
    }
}

impl Eq for Separation {}

impl fmt::Debug for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_set<'a>(f: &mut fmt::Formatter<'_>, it: impl IntoIterator<Item = &'a VertexId>) -> fmt::Result {
    f.write_str("{")?;
    for (i, v) in it.into_iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str("}")
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("sep ")?;
        fmt_set(f, &self.separator)?;
        f.write_str(" A")?;
        fmt_set(f, self.a_side.iter().map(|c| &c.seed))?;
        f.write_str(" B")?;
        fmt_set(f, self.b_side.iter().map(|c| &c.seed))
    }
}

impl Separation {
    /// Builds a separation from a side label for every component of `G − s`.
    ///
    /// Keys of `assignment` may be any vertices outside `s`; each labels the
    /// component containing it. Every component must be labelled exactly once
    /// (repeated keys in one component must agree).
    pub fn new(g: &GraphHandle, s: &BTreeSet<VertexId>, assignment: &BTreeMap<VertexId, Side>) -> Result<Self> {
        let comps = explore::components_minus(g.as_ref(), s, EXPLORE_CAP)?;
        let mut sides: Vec<Option<Side>> = vec![None; comps.len()];
        for (v, side) in assignment {
            let i = explore::locate(g.as_ref(), s, &comps, v)?;
            match sides[i] {
                Some(prev) if prev != *side => {
                    return Err(domain!("conflicting sides for the component seeded at {}", comps[i].seed))
                }
                _ => sides[i] = Some(*side),
            }
        }
        Separation::from_components(g, s, comps, |i, c| {
            sides[i].ok_or_else(|| domain!("component seeded at {} has no side", c.seed))
        })
    }

    /// Builds a separation by labelling each component of `G − s` with `side`.
    pub fn with_sides(
        g: &GraphHandle,
        s: &BTreeSet<VertexId>,
        side: impl FnMut(&ComponentHandle) -> Result<Side>,
    ) -> Result<Self> {
        let comps = explore::components_minus(g.as_ref(), s, EXPLORE_CAP)?;
        let mut side = side;
        Separation::from_components(g, s, comps, |_, c| side(c))
    }

    fn from_components(
        g: &GraphHandle,
        s: &BTreeSet<VertexId>,
        comps: Vec<ComponentHandle>,
        mut side: impl FnMut(usize, &ComponentHandle) -> Result<Side>,
    ) -> Result<Self> {
        let mut a_side = Vec::new();
        let mut b_side = Vec::new();
        for (i, c) in comps.into_iter().enumerate() {
            match side(i, &c)? {
                Side::A => a_side.push(c),
                Side::B => b_side.push(c),
            }
        }
        Ok(Separation { graph: g.clone(), separator: s.clone(), a_side, b_side })
    }

    /// `(A, B)` from explicit vertex sets of a finite graph.
    pub fn from_sets(g: &GraphHandle, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> Result<Self> {
        let all = g.vertices().ok_or_else(|| Error::Unsupported("explicit sides need a finite graph".into()))?;
        for v in &all {
            if !a.contains(v) && !b.contains(v) {
                return Err(domain!("{v} lies in neither side"));
            }
        }
        for v in a.iter().chain(b) {
            check_vertex(g.as_ref(), v)?;
        }
        for v in a.difference(b) {
            for u in g.neighbors(v)? {
                if b.contains(&u) && !a.contains(&u) {
                    return Err(domain!("edge {v}-{u} joins A\\B to B\\A"));
                }
            }
        }
        let s: BTreeSet<VertexId> = a.intersection(b).cloned().collect();
        Separation::with_sides(g, &s, |c| {
            let probe = if s.is_empty() { g.root() } else { c.seed.clone() };
            Ok(if b.contains(&probe) { Side::B } else { Side::A })
        })
    }

    /// The additive neutral element `(V, ∅)`.
    pub fn all_a(g: &GraphHandle) -> Self {
        Separation::with_sides(g, &BTreeSet::new(), |_| Ok(Side::A)).expect("empty separator is valid")
    }

    /// The multiplicative neutral element `(∅, V)`.
    pub fn all_b(g: &GraphHandle) -> Self {
        Separation::with_sides(g, &BTreeSet::new(), |_| Ok(Side::B)).expect("empty separator is valid")
    }

    pub fn graph(&self) -> &GraphHandle {
        &self.graph
    }

    pub fn separator(&self) -> &BTreeSet<VertexId> {
        &self.separator
    }

    pub fn a_side(&self) -> &[ComponentHandle] {
        &self.a_side
    }

    pub fn b_side(&self) -> &[ComponentHandle] {
        &self.b_side
    }

    pub fn order(&self) -> usize {
        self.separator.len()
    }

    pub fn is_neutral(&self) -> bool {
        self.separator.is_empty()
    }

    /// Normal form: separator, then seeds of the A-side and B-side components.
    pub fn key(&self) -> SeparationKey {
        (
            self.separator.iter().cloned().collect(),
            self.a_side.iter().map(|c| c.seed.clone()).collect(),
            self.b_side.iter().map(|c| c.seed.clone()).collect(),
        )
    }

    pub fn side_of_seed(&self, seed: &VertexId) -> Option<Side> {
        if self.a_side.iter().any(|c| &c.seed == seed) {
            Some(Side::A)
        } else if self.b_side.iter().any(|c| &c.seed == seed) {
            Some(Side::B)
        } else {
            None
        }
    }

    pub fn position(&self, v: &VertexId) -> Result<Position> {
        if self.separator.contains(v) {
            return Ok(Position::Separator);
        }
        check_vertex(self.graph.as_ref(), v)?;
        if self.separator.is_empty() {
            return Ok(if self.a_side.is_empty() { Position::B } else { Position::A });
        }
        let mut seen: BTreeSet<VertexId> = [v.clone()].into_iter().collect();
        let mut queue: VecDeque<VertexId> = [v.clone()].into_iter().collect();
        while let Some(x) = queue.pop_front() {
            if self.a_side.iter().any(|c| c.attachments.contains(&x)) {
                return Ok(Position::A);
            }
            if self.b_side.iter().any(|c| c.attachments.contains(&x)) {
                return Ok(Position::B);
            }
            for u in self.graph.neighbors(&x)? {
                if !self.separator.contains(&u) && seen.insert(u.clone()) {
                    queue.push_back(u);
                }
            }
        }
        Err(Error::Internal(format!("{v} reaches no component")))
    }

    pub fn in_a(&self, v: &VertexId) -> Result<bool> {
        Ok(self.position(v)? != Position::B)
    }

    pub fn in_b(&self, v: &VertexId) -> Result<bool> {
        Ok(self.position(v)? != Position::A)
    }

    /// `A` and `B` as explicit sets, for finite graphs.
    pub fn sides(&self) -> Result<(BTreeSet<VertexId>, BTreeSet<VertexId>)> {
        let all = self.graph.vertices().ok_or_else(|| Error::Unsupported("explicit sides need a finite graph".into()))?;
        let mut a = BTreeSet::new();
        let mut b = BTreeSet::new();
        for v in all {
            match self.position(&v)? {
                Position::Separator => {
                    a.insert(v.clone());
                    b.insert(v);
                }
                Position::A => {
                    a.insert(v);
                }
                Position::B => {
                    b.insert(v);
                }
            }
        }
        Ok((a, b))
    }

    /// The separation `(B, A)`.
    pub fn flipped(&self) -> Self {
        Separation {
            graph: self.graph.clone(),
            separator: self.separator.clone(),
            a_side: self.b_side.clone(),
            b_side: self.a_side.clone(),
        }
    }

    fn check_same_graph(&self, other: &Separation) -> Result<()> {
        if same_graph(&self.graph, &other.graph) {
            Ok(())
        } else {
            Err(domain!("separations of different graphs ({} and {})", self.graph.name(), other.graph.name()))
        }
    }

    fn combine(&self, other: &Separation, in_a: impl Fn(bool, bool) -> bool, in_b: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.check_same_graph(other)?;
        let mut sep = BTreeSet::new();
        for v in self.separator.union(&other.separator) {
            let (p, q) = (self.position(v)?, other.position(v)?);
            let a = in_a(p != Position::B, q != Position::B);
            let b = in_b(p != Position::A, q != Position::A);
            if a && b {
                sep.insert(v.clone());
            }
        }
        Separation::with_sides(&self.graph, &sep, |c| {
            let probe = if sep.is_empty() { self.graph.root() } else { c.seed.clone() };
            let (p, q) = (self.position(&probe)?, other.position(&probe)?);
            Ok(if in_a(p != Position::B, q != Position::B) { Side::A } else { Side::B })
        })
    }

    /// `(A ∩ C, B ∪ D)`.
    pub fn plus(&self, other: &Separation) -> Result<Self> {
        self.combine(other, |a, c| a && c, |b, d| b || d)
    }

    /// `(A ∪ C, B ∩ D)`.
    pub fn times(&self, other: &Separation) -> Result<Self> {
        self.combine(other, |a, c| a || c, |b, d| b && d)
    }

    /// Some component on each side is adjacent to every separator vertex.
    pub fn is_tight(&self) -> bool {
        let full = |c: &ComponentHandle| c.touches == self.separator;
        self.a_side.iter().any(full) && self.b_side.iter().any(full)
    }

    /// Image under a group element.
    pub fn image(&self, action: &GroupAction, w: &Word) -> Result<Self> {
        let s = action.apply_set(w, &self.separator)?;
        let mut assignment = BTreeMap::new();
        for c in &self.a_side {
            assignment.insert(action.apply_word(w, &c.seed)?, Side::A);
        }
        for c in &self.b_side {
            assignment.insert(action.apply_word(w, &c.seed)?, Side::B);
        }
        if s.is_empty() {
            let side = if self.a_side.is_empty() { Side::B } else { Side::A };
            return Separation::with_sides(&self.graph, &s, |_| Ok(side));
        }
        Separation::new(&self.graph, &s, &assignment)
    }
}

/// `({x} ∪ N(x), V ∖ {x})`; its separator is `N(x)`.
pub fn elementary(g: &GraphHandle, x: &VertexId) -> Result<Separation> {
    check_vertex(g.as_ref(), x)?;
    let s: BTreeSet<VertexId> = g.neighbors(x)?.into_iter().collect();
    Separation::with_sides(g, &s, |c| Ok(if &c.seed == x { Side::A } else { Side::B }))
}

/// Every assignment of sides to `comps` indexed by a bit mask.
fn assignments(m: usize) -> Result<core::ops::Range<u64>> {
    if m > 24 {
        return Err(Error::Budget(format!("{m} components is too many side assignments to enumerate")));
    }
    Ok(0..(1u64 << m))
}

/// All tight separations with `v` in the separator, order at most `k`, and
/// separator inside `ball(v, search_radius)`, sorted by normal form.
///
/// Complete only relative to `search_radius`.
pub fn enumerate_tight(g: &GraphHandle, v: &VertexId, k: usize, search_radius: usize) -> Result<Vec<Separation>> {
    if k == 0 {
        return Err(domain!("order bound must be at least 1"));
    }
    let ball = explore::ball_around(g.as_ref(), v, search_radius)?;
    let others: Vec<VertexId> = ball.vertices.iter().filter(|u| *u != v).cloned().collect();
    let mut found: BTreeMap<SeparationKey, Separation> = BTreeMap::new();
    let mut chosen: Vec<usize> = Vec::new();
    subsets(others.len(), k - 1, 0, &mut chosen, &mut |idx| {
        let mut s: BTreeSet<VertexId> = idx.iter().map(|&i| others[i].clone()).collect();
        s.insert(v.clone());
        let comps = explore::components_minus(g.as_ref(), &s, EXPLORE_CAP)?;
        let full: Vec<bool> = comps.iter().map(|c| c.touches == s).collect();
        if full.iter().filter(|f| **f).count() < 2 {
            return Ok(());
        }
        for mask in assignments(comps.len())? {
            let in_a = |i: usize| mask >> i & 1 == 0;
            let a_full = (0..comps.len()).any(|i| full[i] && in_a(i));
            let b_full = (0..comps.len()).any(|i| full[i] && !in_a(i));
            if !(a_full && b_full) {
                continue;
            }
            let x = Separation::from_components(g, &s, comps.clone(), |i, _| Ok(if in_a(i) { Side::A } else { Side::B }))?;
            found.entry(x.key()).or_insert(x);
        }
        Ok(())
    })?;
    Ok(found.into_values().collect())
}

fn subsets(
    n: usize,
    max: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    f(chosen)?;
    if chosen.len() == max {
        return Ok(());
    }
    for i in start..n {
        chosen.push(i);
        subsets(n, max, i + 1, chosen, f)?;
        chosen.pop();
    }
    Ok(())
}

/// Separator, A-side seeds and B-side seeds, in canonical order.
pub type SeparationKey = (Vec<VertexId>, Vec<VertexId>, Vec<VertexId>);

/// A `+`/`×` expression over separations of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparationExpression {
    Leaf(Separation),
    Plus(Box<SeparationExpression>, Box<SeparationExpression>),
    Times(Box<SeparationExpression>, Box<SeparationExpression>),
}

impl SeparationExpression {
    pub fn plus(a: Self, b: Self) -> Self {
        SeparationExpression::Plus(Box::new(a), Box::new(b))
    }

    pub fn times(a: Self, b: Self) -> Self {
        SeparationExpression::Times(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<&Separation> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match e {
                SeparationExpression::Leaf(x) => out.push(x),
                SeparationExpression::Plus(a, b) | SeparationExpression::Times(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        out
    }

    pub fn evaluate(&self) -> Result<Separation> {
        match self {
            SeparationExpression::Leaf(x) => Ok(x.clone()),
            SeparationExpression::Plus(a, b) => a.evaluate()?.plus(&b.evaluate()?),
            SeparationExpression::Times(a, b) => a.evaluate()?.times(&b.evaluate()?),
        }
    }

    fn fold(op: fn(Self, Self) -> Self, items: Vec<Self>) -> Self {
        let mut it = items.into_iter().rev();
        let last = it.next().expect("nonempty fold");
        it.fold(last, |acc, e| op(e, acc))
    }
}

impl fmt::Display for SeparationExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparationExpression::Leaf(x) => write!(f, "{x}"),
            SeparationExpression::Plus(a, b) => write!(f, "({a} + {b})"),
            SeparationExpression::Times(a, b) => write!(f, "({a} × {b})"),
        }
    }
}

pub fn evaluate(e: &SeparationExpression) -> Result<Separation> {
    e.evaluate()
}

fn union_of_neighborhoods<'a>(comps: impl IntoIterator<Item = &'a ComponentHandle>) -> BTreeSet<VertexId> {
    comps.into_iter().flat_map(|c| c.touches.iter().cloned()).collect()
}

/// Expresses `x` through `+` and `×` of tight separations of order at most
/// `x.order()`.
///
/// Non-tight inputs take the product case when no A-side component sees the
/// whole separator, else the sum case. The leftover factor `(X, V)` (dually
/// `(V, Y)`) is split into singleton separators, and a singleton at a cut
/// vertex into tight pieces. Leaves are tight, neutral, or such a singleton
/// at a non-cut vertex, which no tight expression can produce.
pub fn decompose_into_tight(x: &Separation) -> Result<SeparationExpression> {
    decompose(x, x.order() + 1)
}

fn decompose(x: &Separation, depth: usize) -> Result<SeparationExpression> {
    if depth == 0 {
        return Err(Error::Internal(format!("decomposition depth guard hit at {x}")));
    }
    if x.is_tight() || x.is_neutral() {
        return Ok(SeparationExpression::Leaf(x.clone()));
    }
    let g = x.graph();
    let s = x.separator();
    if !x.a_side.iter().any(|c| &c.touches == s) {
        let rest: BTreeSet<VertexId> = s.difference(&union_of_neighborhoods(&x.a_side)).cloned().collect();
        let mut factors = vec![one_sided(g, &rest, Side::A)?];
        for c in &x.a_side {
            let y = Separation::with_sides(g, &c.touches, |d| {
                Ok(if d.seed == c.seed || c.attachments.contains(&d.seed) { Side::A } else { Side::B })
            })?;
            factors.push(decompose(&y, depth - 1)?);
        }
        return Ok(SeparationExpression::fold(SeparationExpression::times, factors));
    }
    let rest: BTreeSet<VertexId> = s.difference(&union_of_neighborhoods(&x.b_side)).cloned().collect();
    let mut terms = vec![one_sided(g, &rest, Side::B)?];
    for c in &x.b_side {
        let y = Separation::with_sides(g, &c.touches, |d| {
            Ok(if d.seed == c.seed || c.attachments.contains(&d.seed) { Side::B } else { Side::A })
        })?;
        terms.push(decompose(&y, depth - 1)?);
    }
    Ok(SeparationExpression::fold(SeparationExpression::plus, terms))
}

/// `(X, V)` for `side == A`, `(V, X)` for `side == B`, split over the
/// vertices of `X`.
fn one_sided(g: &GraphHandle, xs: &BTreeSet<VertexId>, side: Side) -> Result<SeparationExpression> {
    let other = if side == Side::A { Side::B } else { Side::A };
    if xs.is_empty() {
        let n = Separation::with_sides(g, xs, |_| Ok(other))?;
        return Ok(SeparationExpression::Leaf(n));
    }
    let mut pieces = Vec::new();
    for v in xs {
        let single: BTreeSet<VertexId> = [v.clone()].into_iter().collect();
        let comps = explore::components_minus(g.as_ref(), &single, EXPLORE_CAP)?;
        if comps.len() < 2 {
            pieces.push(SeparationExpression::Leaf(Separation::with_sides(g, &single, |_| Ok(other))?));
            continue;
        }
        // ({v}, V) is the sum over components C of (V ∖ C, C ∪ {v}); dually a product.
        let mut parts = Vec::new();
        for c in &comps {
            let y = Separation::with_sides(g, &single, |d| Ok(if d.seed == c.seed { other } else { side }))?;
            parts.push(SeparationExpression::Leaf(y));
        }
        let op = if side == Side::A { SeparationExpression::plus } else { SeparationExpression::times };
        pieces.push(SeparationExpression::fold(op, parts));
    }
    let op = if side == Side::A { SeparationExpression::times } else { SeparationExpression::plus };
    Ok(SeparationExpression::fold(op, pieces))
}

/// An infinite component of `G − ball(root, r)`, standing in for the ends it contains.
#[derive(Clone, Debug)]
pub struct EndProxy {
    pub radius: usize,
    pub ball: Arc<BTreeSet<VertexId>>,
    pub component: ComponentHandle,
}

impl PartialEq for EndProxy {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.component.seed == other.component.seed
    }
}

#[derive(Clone, Debug)]
pub struct ProxyReport {
    pub proxies: Vec<EndProxy>,
    /// Components whose finiteness could not be decided.
    pub warnings: Vec<String>,
}

pub fn end_proxies(g: &GraphHandle, r: usize) -> Result<ProxyReport> {
    let ball = explore::ball_around(g.as_ref(), &g.root(), r)?;
    let set = Arc::new(ball.vertex_set());
    let comps = explore::components_minus(g.as_ref(), &set, EXPLORE_CAP)?;
    let mut proxies = Vec::new();
    let mut warnings = Vec::new();
    for c in comps {
        match c.verdict {
            Finiteness::Infinite => proxies.push(EndProxy { radius: r, ball: set.clone(), component: c }),
            Finiteness::UnknownBeyond(cap) => {
                warnings.push(format!("component at {} still growing after {cap} layers", c.seed))
            }
            Finiteness::Finite(_) => {}
        }
    }
    Ok(ProxyReport { proxies, warnings })
}

/// Whether `x` puts the two proxies strictly on opposite sides.
pub fn distinguishes(x: &Separation, p: &EndProxy, q: &EndProxy) -> Result<bool> {
    for e in [p, q] {
        if !x.separator().is_subset(&e.ball) {
            return Err(Error::Resolution(format!(
                "separator of {x} leaves the radius-{} ball; refine the resolution",
                e.radius
            )));
        }
    }
    let sp = x.position(&p.component.seed)?;
    let sq = x.position(&q.component.seed)?;
    Ok(matches!((sp, sq), (Position::A, Position::B) | (Position::B, Position::A)))
}

/// Orbit representatives of tight separations of bounded order.
#[derive(Clone, Debug)]
pub struct OrbitCatalog {
    pub representatives: Vec<Separation>,
    pub action: GroupAction,
    pub budget: usize,
    pub order_bound: usize,
    pub radius: usize,
}

/// One tight-separation list per vertex-orbit representative in
/// `ball(root, radius)`, quotiented by words of length at most `budget`.
pub fn tight_orbit_catalog(
    g: &GraphHandle,
    action: &GroupAction,
    n: usize,
    radius: usize,
    budget: usize,
) -> Result<OrbitCatalog> {
    let action = action.clone().with_budget(budget);
    let ball = explore::ball_around(g.as_ref(), &g.root(), radius)?;
    let classes = action.orbit_partition(&ball.vertices)?;
    let mut all: BTreeMap<SeparationKey, Separation> = BTreeMap::new();
    for class in &classes {
        for x in enumerate_tight(g, &class[0], n, radius)? {
            all.entry(x.key()).or_insert(x);
        }
    }
    let representatives = quotient(&action, all.into_values().collect())?;
    Ok(OrbitCatalog { representatives, action, budget, order_bound: n, radius })
}

/// Keeps the first separation of each budget-relative orbit.
pub fn quotient(action: &GroupAction, seps: Vec<Separation>) -> Result<Vec<Separation>> {
    let mut reps: Vec<Separation> = Vec::new();
    let mut covered: Vec<bool> = vec![false; seps.len()];
    for i in 0..seps.len() {
        if covered[i] {
            continue;
        }
        covered[i] = true;
        let x = &seps[i];
        let words: Vec<(BTreeSet<VertexId>, Word)> = if action.is_permutation_group() {
            action
                .elements_exact(&[])?
                .into_iter()
                .map(|(w, _)| Ok((action.apply_set(&w, x.separator())?, w)))
                .collect::<Result<_>>()?
        } else {
            let mut probe = x.separator().clone();
            probe.extend(explore::neighborhood(x.graph().as_ref(), x.separator())?);
            let stab = action.stabilizer(x.separator(), &probe)?;
            let mut out = Vec::new();
            for (img, u) in action.set_orbit(x.separator(), action.budget)? {
                for s in &stab.elements {
                    let mut w = s.clone();
                    w.extend(u.iter().copied());
                    out.push((img.clone(), w));
                }
            }
            out
        };
        for (img, w) in words {
            for (j, y) in seps.iter().enumerate() {
                if !covered[j] && y.separator() == &img && &x.image(action, &w)? == y {
                    covered[j] = true;
                }
            }
        }
        reps.push(x.clone());
    }
    Ok(reps)
}
