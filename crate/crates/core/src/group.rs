//! Group actions given by generator morphisms, with budget-relative orbit
//! and stabilizer computations.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::explore::Ball;
use crate::graph::Graph;
use crate::union_find::UnionFind;
use crate::vertex::VertexId;

pub const DEFAULT_BUDGET: usize = 12;

/// Largest group or stabilizer we are willing to enumerate.
pub const ELEMENT_CAP: usize = 200_000;
const STABILIZER_CAP: usize = 4096;

pub type VertexMap = Arc<dyn Fn(&VertexId) -> Result<VertexId> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Permutation { fwd: BTreeMap<VertexId, VertexId>, inv: BTreeMap<VertexId, VertexId> },
    Map { fwd: VertexMap, inv: VertexMap, involution: bool },
}

/// A graph automorphism, evaluated lazily, named by `tag`.
#[derive(Clone)]
pub struct GraphMorphism {
    tag: String,
    kind: Kind,
}

impl fmt::Debug for GraphMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Permutation { fwd, .. } => write!(f, "{}: permutation of {} points", self.tag, fwd.len()),
            Kind::Map { .. } => write!(f, "{}: map", self.tag),
        }
    }
}

impl GraphMorphism {
    /// A permutation of a finite vertex set; points outside the map are fixed.
    pub fn permutation(tag: impl Into<String>, map: BTreeMap<VertexId, VertexId>) -> Result<Self> {
        let tag = tag.into();
        let mut inv = BTreeMap::new();
        for (a, b) in &map {
            if inv.insert(b.clone(), a.clone()).is_some() {
                return Err(domain!("generator {tag} is not injective at {b}"));
            }
        }
        if inv.keys().any(|b| !map.contains_key(b)) {
            return Err(domain!("generator {tag} does not permute its domain"));
        }
        let fwd = map.into_iter().filter(|(a, b)| a != b).collect::<BTreeMap<_, _>>();
        let inv = inv.into_iter().filter(|(a, b)| a != b).collect();
        Ok(GraphMorphism { tag, kind: Kind::Permutation { fwd, inv } })
    }

    pub fn from_pairs(tag: impl Into<String>, pairs: &[(i64, i64)]) -> Result<Self> {
        GraphMorphism::permutation(
            tag,
            pairs.iter().map(|&(a, b)| (VertexId::Int(a), VertexId::Int(b))).collect(),
        )
    }

    pub fn map(tag: impl Into<String>, fwd: VertexMap, inv: VertexMap) -> Self {
        GraphMorphism { tag: tag.into(), kind: Kind::Map { fwd, inv, involution: false } }
    }

    pub fn involution(tag: impl Into<String>, f: VertexMap) -> Self {
        GraphMorphism { tag: tag.into(), kind: Kind::Map { fwd: f.clone(), inv: f, involution: true } }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_permutation(&self) -> bool {
        matches!(self.kind, Kind::Permutation { .. })
    }

    pub fn is_involution(&self) -> bool {
        match &self.kind {
            Kind::Permutation { fwd, inv } => fwd == inv,
            Kind::Map { involution, .. } => *involution,
        }
    }

    pub fn apply(&self, v: &VertexId) -> Result<VertexId> {
        match &self.kind {
            Kind::Permutation { fwd, .. } => Ok(fwd.get(v).cloned().unwrap_or_else(|| v.clone())),
            Kind::Map { fwd, .. } => fwd(v),
        }
    }

    pub fn apply_inverse(&self, v: &VertexId) -> Result<VertexId> {
        match &self.kind {
            Kind::Permutation { inv, .. } => Ok(inv.get(v).cloned().unwrap_or_else(|| v.clone())),
            Kind::Map { inv, .. } => inv(v),
        }
    }

    /// Moved points of a permutation generator.
    pub fn support(&self) -> Option<BTreeMap<VertexId, VertexId>> {
        match &self.kind {
            Kind::Permutation { fwd, .. } => Some(fwd.clone()),
            Kind::Map { .. } => None,
        }
    }

    /// Checks adjacency preservation and `inverse ∘ self = id` on a ball.
    pub fn check_on_ball(&self, g: &dyn Graph, b: &Ball) -> Result<()> {
        let mut images = BTreeSet::new();
        for v in &b.vertices {
            let w = self.apply(v)?;
            if !g.contains(&w) {
                return Err(domain!("{} maps {v} outside the graph", self.tag));
            }
            if &self.apply_inverse(&w)? != v {
                return Err(domain!("{} and its inverse do not compose to the identity at {v}", self.tag));
            }
            images.insert(w);
        }
        if images.len() != b.vertices.len() {
            return Err(domain!("{} is not injective on the ball", self.tag));
        }
        for (u, v) in &b.edges {
            let (x, y) = (self.apply(u)?, self.apply(v)?);
            if !g.neighbors(&x)?.contains(&y) {
                return Err(domain!("{} maps edge {u}-{v} to non-edge {x}-{y}", self.tag));
            }
        }
        Ok(())
    }
}

/// A generator or the formal inverse of one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

/// Letters applied left to right: the first letter acts first.
pub type Word = Vec<Letter>;

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| Letter { generator: l.generator, inverse: !l.inverse }).collect()
}

/// A finitely generated group acting on a graph, with a word budget.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub generators: Vec<GraphMorphism>,
    pub budget: usize,
}

impl Default for GroupAction {
    fn default() -> Self {
        GroupAction::trivial()
    }
}

/// A set of group elements fixing something, known by their images of a probe set.
#[derive(Clone, Debug)]
pub struct Stabilizer {
    pub elements: Vec<Word>,
    /// Images of the probe points, one row per element, same order as `elements`.
    pub signatures: BTreeSet<Vec<VertexId>>,
    /// Whether the enumeration was exhaustive (finite permutation group).
    pub exact: bool,
}

impl Stabilizer {
    pub fn order(&self) -> usize {
        self.signatures.len()
    }
}

impl GroupAction {
    pub fn trivial() -> Self {
        GroupAction { generators: Vec::new(), budget: DEFAULT_BUDGET }
    }

    pub fn new(generators: Vec<GraphMorphism>) -> Self {
        GroupAction { generators, budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// True when every generator is a finite permutation, so the group is finite and enumerable.
    pub fn is_permutation_group(&self) -> bool {
        self.generators.iter().all(|g| g.is_permutation())
    }

    /// Generators and the inverses of non-involutions.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            out.push(Letter { generator: i, inverse: false });
            if !g.is_involution() {
                out.push(Letter { generator: i, inverse: true });
            }
        }
        out
    }

    pub fn letter_tag(&self, l: Letter) -> String {
        let t = self.generators[l.generator].tag();
        if l.inverse && !self.generators[l.generator].is_involution() {
            format!("{t}^-1")
        } else {
            String::from(t)
        }
    }

    pub fn word_tag(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return String::from("id");
        }
        let parts: Vec<String> = w.iter().map(|l| self.letter_tag(*l)).collect();
        parts.join("*")
    }

    pub fn apply_letter(&self, l: Letter, v: &VertexId) -> Result<VertexId> {
        let g = &self.generators[l.generator];
        if l.inverse {
            g.apply_inverse(v)
        } else {
            g.apply(v)
        }
    }

    pub fn apply_word(&self, w: &[Letter], v: &VertexId) -> Result<VertexId> {
        let mut x = v.clone();
        for l in w {
            x = self.apply_letter(*l, &x)?;
        }
        Ok(x)
    }

    pub fn apply_set(&self, w: &[Letter], s: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
        s.iter().map(|v| self.apply_word(w, v)).collect()
    }

    fn signature(&self, w: &[Letter], probe: &[VertexId]) -> Result<Vec<VertexId>> {
        probe.iter().map(|v| self.apply_word(w, v)).collect()
    }

    /// Every element of a finite permutation group, as a word and its
    /// permutation of `points`, identity first.
    pub fn elements_exact(&self, points: &[VertexId]) -> Result<Vec<(Word, Vec<VertexId>)>> {
        if !self.is_permutation_group() {
            return Err(Error::Unsupported("exact enumeration needs permutation generators".into()));
        }
        let mut points: BTreeSet<VertexId> = points.iter().cloned().collect();
        for g in &self.generators {
            points.extend(g.support().unwrap().into_keys());
        }
        let points: Vec<VertexId> = points.into_iter().collect();
        let letters = self.letters();
        let mut seen: BTreeSet<Vec<VertexId>> = BTreeSet::new();
        let mut out: Vec<(Word, Vec<VertexId>)> = Vec::new();
        seen.insert(points.clone());
        out.push((Vec::new(), points.clone()));
        let mut head = 0;
        while head < out.len() {
            let (w, _) = out[head].clone();
            head += 1;
            for &l in &letters {
                let mut nw = w.clone();
                nw.push(l);
                let sig = self.signature(&nw, &points)?;
                if seen.insert(sig.clone()) {
                    if out.len() >= ELEMENT_CAP {
                        return Err(Error::Budget(format!("group has more than {ELEMENT_CAP} elements")));
                    }
                    out.push((nw, sig));
                }
            }
        }
        Ok(out)
    }

    /// Images of a finite set under words of length at most the budget,
    /// each with a shortest word reaching it.
    pub fn set_orbit(&self, x: &BTreeSet<VertexId>, depth: usize) -> Result<BTreeMap<BTreeSet<VertexId>, Word>> {
        let letters = self.letters();
        let mut reps: BTreeMap<BTreeSet<VertexId>, Word> = BTreeMap::new();
        reps.insert(x.clone(), Vec::new());
        let mut frontier = vec![x.clone()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for y in &frontier {
                let w = reps[y].clone();
                for &l in &letters {
                    let z: BTreeSet<VertexId> = y.iter().map(|v| self.apply_letter(l, v)).collect::<Result<_>>()?;
                    if !reps.contains_key(&z) {
                        let mut nw = w.clone();
                        nw.push(l);
                        reps.insert(z.clone(), nw);
                        next.push(z);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(reps)
    }

    /// A word of length at most the budget mapping set `a` onto set `b`.
    pub fn find_set_map(&self, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> Result<Option<Word>> {
        if a.len() != b.len() {
            return Ok(None);
        }
        if self.is_permutation_group() {
            for (w, _) in self.elements_exact(&[])? {
                if &self.apply_set(&w, a)? == b {
                    return Ok(Some(w));
                }
            }
            return Ok(None);
        }
        Ok(self.set_orbit(a, self.budget)?.remove(b))
    }

    /// Setwise stabilizer of `x`, with elements told apart by their images of `probe`.
    ///
    /// Finite permutation groups are handled exactly. Otherwise the
    /// stabilizer is generated from Schreier generators of the budget-bounded
    /// orbit of `x`, which is exact only when that orbit closes within the budget.
    pub fn stabilizer(&self, x: &BTreeSet<VertexId>, probe: &BTreeSet<VertexId>) -> Result<Stabilizer> {
        let probe: Vec<VertexId> = probe.iter().cloned().collect();
        if self.is_permutation_group() {
            let mut elements = Vec::new();
            let mut signatures = BTreeSet::new();
            for (w, _) in self.elements_exact(&probe)? {
                if &self.apply_set(&w, x)? == x && signatures.insert(self.signature(&w, &probe)?) {
                    elements.push(w);
                }
            }
            return Ok(Stabilizer { elements, signatures, exact: true });
        }
        let reps = self.set_orbit(x, self.budget)?;
        let mut gens: Vec<Word> = Vec::new();
        let mut gen_sigs = BTreeSet::new();
        gen_sigs.insert(probe.clone());
        for (y, u) in &reps {
            if u.len() >= self.budget {
                continue;
            }
            for l in self.letters() {
                let z: BTreeSet<VertexId> = y.iter().map(|v| self.apply_letter(l, v)).collect::<Result<_>>()?;
                let Some(uz) = reps.get(&z) else { continue };
                let mut s = u.clone();
                s.push(l);
                s.extend(inverse_word(uz));
                if gen_sigs.insert(self.signature(&s, &probe)?) {
                    gens.push(s);
                }
            }
        }
        let mut elements: Vec<Word> = vec![Vec::new()];
        let mut signatures: BTreeSet<Vec<VertexId>> = [probe.clone()].into_iter().collect();
        let mut queue: VecDeque<usize> = [0].into_iter().collect();
        while let Some(i) = queue.pop_front() {
            for s in &gens {
                let mut w = elements[i].clone();
                w.extend(s.iter().copied());
                if signatures.insert(self.signature(&w, &probe)?) {
                    if elements.len() >= STABILIZER_CAP {
                        return Err(Error::Budget(format!(
                            "stabilizer exceeds {STABILIZER_CAP} elements at word budget {}",
                            self.budget
                        )));
                    }
                    queue.push_back(elements.len());
                    elements.push(w);
                }
            }
        }
        Ok(Stabilizer { elements, signatures, exact: false })
    }

    /// Partition of `items` into classes related by words of length at most
    /// the budget (by the whole group for permutation generators).
    pub fn orbit_partition(&self, items: &[VertexId]) -> Result<Vec<Vec<VertexId>>> {
        let items: Vec<VertexId> = items.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<&VertexId, usize> = items.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut uf = UnionFind::new(items.len());
        let letters = self.letters();
        if self.is_permutation_group() {
            // orbits of a permutation group are the components of its Schreier graph
            let mut points: BTreeSet<VertexId> = items.iter().cloned().collect();
            for g in &self.generators {
                points.extend(g.support().unwrap().into_keys());
            }
            let points: Vec<VertexId> = points.into_iter().collect();
            let pidx: BTreeMap<&VertexId, usize> = points.iter().enumerate().map(|(i, v)| (v, i)).collect();
            let mut puf = UnionFind::new(points.len());
            for (i, p) in points.iter().enumerate() {
                for &l in &letters {
                    puf.union(i, pidx[&self.apply_letter(l, p)?]);
                }
            }
            for (i, v) in items.iter().enumerate() {
                for (j, u) in items.iter().enumerate().skip(i + 1) {
                    if puf.find(pidx[v]) == puf.find(pidx[u]) {
                        uf.union(i, j);
                    }
                }
            }
        } else {
            for (i, v) in items.iter().enumerate() {
                let mut seen: BTreeSet<VertexId> = [v.clone()].into_iter().collect();
                let mut frontier = vec![v.clone()];
                for _ in 0..self.budget {
                    let mut next = Vec::new();
                    for x in &frontier {
                        for &l in &letters {
                            let y = self.apply_letter(l, x)?;
                            if seen.insert(y.clone()) {
                                if let Some(&j) = index.get(&y) {
                                    uf.union(i, j);
                                }
                                next.push(y);
                            }
                        }
                    }
                    frontier = next;
                }
            }
        }
        Ok(uf
            .classes()
            .into_iter()
            .map(|c| c.into_iter().map(|i| items[i].clone()).collect())
            .collect())
    }

    /// Checks every generator on a ball.
    pub fn check_on_ball(&self, g: &dyn Graph, b: &Ball) -> Result<()> {
        self.generators.iter().try_for_each(|m| m.check_on_ball(g, b))
    }
}

/// Budget-relative orbit partition of a ball's vertices.
pub fn orbits_on_ball(a: &GroupAction, b: &Ball) -> Result<Vec<Vec<VertexId>>> {
    a.orbit_partition(&b.vertices)
}
