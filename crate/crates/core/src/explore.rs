//! Bounded exploration: balls, components of `G − S`, and locating vertices.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::graph::{check_vertex, Graph};
use crate::vertex::VertexId;

/// Closed ball around a set of centres.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub centers: BTreeSet<VertexId>,
    pub radius: usize,
    /// Sorted vertex list.
    pub vertices: Vec<VertexId>,
    /// Distance from the centre set.
    pub distance: BTreeMap<VertexId, usize>,
    /// Induced edges `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(VertexId, VertexId)>,
    /// Vertices at distance exactly `radius`.
    pub boundary: Vec<VertexId>,
}

impl Ball {
    pub fn contains(&self, v: &VertexId) -> bool {
        self.distance.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.vertices.iter().cloned().collect()
    }

    pub fn degree_in_ball(&self, v: &VertexId) -> usize {
        self.edges.iter().filter(|(a, b)| a == v || b == v).count()
    }
}

/// Breadth-first closed ball; also checks neighbour symmetry on every explored vertex.
pub fn ball(g: &dyn Graph, centers: &BTreeSet<VertexId>, r: usize) -> Result<Ball> {
    if centers.is_empty() {
        return Err(domain!("ball needs at least one centre"));
    }
    let mut distance = BTreeMap::new();
    let mut queue = VecDeque::new();
    for c in centers {
        check_vertex(g, c)?;
        distance.insert(c.clone(), 0usize);
        queue.push_back(c.clone());
    }
    let mut edges = BTreeSet::new();
    while let Some(v) = queue.pop_front() {
        let d = distance[&v];
        let ns = g.neighbors(&v)?;
        for u in &ns {
            if u == &v {
                return Err(Error::Internal(format!("self-loop at {v} in {}", g.name())));
            }
            if !g.neighbors(u)?.contains(&v) {
                return Err(Error::Internal(format!("asymmetric neighbours {v} -> {u} in {}", g.name())));
            }
        }
        for u in ns {
            match distance.get(&u) {
                Some(_) => {}
                None if d < r => {
                    distance.insert(u.clone(), d + 1);
                    queue.push_back(u.clone());
                }
                None => continue,
            }
            let e = if v < u { (v.clone(), u) } else { (u, v.clone()) };
            edges.insert(e);
        }
    }
    let vertices: Vec<VertexId> = distance.keys().cloned().collect();
    let boundary = distance.iter().filter(|(_, &d)| d == r).map(|(v, _)| v.clone()).collect();
    Ok(Ball { centers: centers.clone(), radius: r, vertices, distance, edges: edges.into_iter().collect(), boundary })
}

pub fn ball_around(g: &dyn Graph, center: &VertexId, r: usize) -> Result<Ball> {
    ball(g, &[center.clone()].into_iter().collect(), r)
}

/// Vertices outside `s` with a neighbour in `s`.
pub fn neighborhood(g: &dyn Graph, s: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
    let mut out = BTreeSet::new();
    for v in s {
        for u in g.neighbors(v)? {
            if !s.contains(&u) {
                out.insert(u);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Finiteness {
    Finite(usize),
    Infinite,
    /// Still growing when exploration stopped at this radius.
    UnknownBeyond(usize),
}

/// A component of `G − S`.
///
/// Components are keyed by `seed`, their least vertex adjacent to `S` (the
/// graph root when `S` is empty), which is computable even for infinite
/// components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentHandle {
    pub separator: Arc<BTreeSet<VertexId>>,
    pub seed: VertexId,
    /// Vertices of the component adjacent to the separator.
    pub attachments: BTreeSet<VertexId>,
    /// Separator vertices adjacent to the component.
    pub touches: BTreeSet<VertexId>,
    pub verdict: Finiteness,
}

impl ComponentHandle {
    pub fn is_infinite(&self) -> bool {
        self.verdict == Finiteness::Infinite
    }
}

fn bfs_avoiding(
    g: &dyn Graph,
    start: &VertexId,
    avoid: &BTreeSet<VertexId>,
    within: Option<&BTreeSet<VertexId>>,
    limit: Option<usize>,
) -> Result<(BTreeSet<VertexId>, bool)> {
    let mut seen: BTreeSet<VertexId> = [start.clone()].into_iter().collect();
    let mut queue: VecDeque<(VertexId, usize)> = [(start.clone(), 0)].into_iter().collect();
    let mut truncated = false;
    while let Some((v, d)) = queue.pop_front() {
        for u in g.neighbors(&v)? {
            if avoid.contains(&u) || seen.contains(&u) {
                continue;
            }
            if within.is_some_and(|w| !w.contains(&u)) {
                continue;
            }
            if limit.is_some_and(|l| d >= l) {
                truncated = true;
                continue;
            }
            seen.insert(u.clone());
            queue.push_back((u, d + 1));
        }
    }
    Ok((seen, truncated))
}

/// One handle per component of `G − S` adjacent to `S`, sorted by seed.
///
/// Verdicts are exact when the graph has a hull oracle; otherwise components
/// still growing after `explore_cap` BFS layers are `UnknownBeyond(explore_cap)`
/// (and components joined only beyond the cap are reported separately).
pub fn components_minus(
    g: &dyn Graph,
    s: &BTreeSet<VertexId>,
    explore_cap: usize,
) -> Result<Vec<ComponentHandle>> {
    for v in s {
        check_vertex(g, v)?;
    }
    let sep = Arc::new(s.clone());
    if s.is_empty() {
        let verdict = match g.vertices() {
            Some(vs) => Finiteness::Finite(vs.len()),
            None => Finiteness::Infinite,
        };
        return Ok(alloc::vec![ComponentHandle {
            separator: sep,
            seed: g.root(),
            attachments: BTreeSet::new(),
            touches: BTreeSet::new(),
            verdict,
        }]);
    }
    let attach = neighborhood(g, s)?;
    let hull = g.hull(s).transpose()?;
    let mut out = Vec::new();
    let mut assigned: BTreeSet<VertexId> = BTreeSet::new();
    for a in &attach {
        if assigned.contains(a) {
            continue;
        }
        let (members, truncated) = match &hull {
            Some(h) => bfs_avoiding(g, a, s, Some(&h.region), None)?,
            None => bfs_avoiding(g, a, s, None, Some(explore_cap))?,
        };
        let attachments: BTreeSet<VertexId> = members.intersection(&attach).cloned().collect();
        let verdict = match &hull {
            Some(h) if members.iter().any(|v| h.frontier.contains(v)) => Finiteness::Infinite,
            Some(_) => Finiteness::Finite(members.len()),
            None if truncated => Finiteness::UnknownBeyond(explore_cap),
            None => Finiteness::Finite(members.len()),
        };
        let mut touches = BTreeSet::new();
        for x in &attachments {
            for u in g.neighbors(x)? {
                if s.contains(&u) {
                    touches.insert(u);
                }
            }
        }
        assigned.extend(attachments.iter().cloned());
        out.push(ComponentHandle {
            separator: sep.clone(),
            seed: a.clone(),
            attachments,
            touches,
            verdict,
        });
    }
    Ok(out)
}

/// Index of the component (from `components_minus` for the same `s`) containing `v`.
pub fn locate(g: &dyn Graph, s: &BTreeSet<VertexId>, comps: &[ComponentHandle], v: &VertexId) -> Result<usize> {
    if s.contains(v) {
        return Err(domain!("{v} lies in the separator"));
    }
    check_vertex(g, v)?;
    if s.is_empty() {
        return Ok(0);
    }
    let mut seen: BTreeSet<VertexId> = [v.clone()].into_iter().collect();
    let mut queue: VecDeque<VertexId> = [v.clone()].into_iter().collect();
    while let Some(x) = queue.pop_front() {
        if let Some(i) = comps.iter().position(|c| c.attachments.contains(&x)) {
            return Ok(i);
        }
        for u in g.neighbors(&x)? {
            if !s.contains(&u) && seen.insert(u.clone()) {
                queue.push_back(u);
            }
        }
    }
    Err(Error::Internal(format!("{v} reaches no component of G - S")))
}

/// All vertices of a finite component, given its handle.
pub fn component_vertices(g: &dyn Graph, c: &ComponentHandle) -> Result<BTreeSet<VertexId>> {
    match c.verdict {
        Finiteness::Finite(_) => Ok(bfs_avoiding(g, &c.seed, &c.separator, None, None)?.0),
        _ => Err(domain!("component seeded at {} is not known to be finite", c.seed)),
    }
}

/// Vertices of the component within a ball of radius `r` around the separator.
pub fn component_window(g: &dyn Graph, c: &ComponentHandle, window: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>> {
    let (mut seen, _) = bfs_avoiding(g, &c.seed, &c.separator, Some(window), None)?;
    // pieces of the component that re-enter the window only through outside paths
    for a in &c.attachments {
        if !seen.contains(a) {
            seen.extend(bfs_avoiding(g, a, &c.separator, Some(window), None)?.0);
        }
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraph, Grid2d, LineGraph, RegularTree};

    fn set(vs: &[VertexId]) -> BTreeSet<VertexId> {
        vs.iter().cloned().collect()
    }

    #[test]
    fn line_ball_radius_two() {
        let b = ball_around(&LineGraph, &VertexId::Int(0), 2).unwrap();
        assert_eq!(b.vertices, (-2..=2).map(VertexId::Int).collect::<Vec<_>>());
        assert_eq!(b.edges.len(), 4);
        assert_eq!(b.boundary, alloc::vec![VertexId::Int(-2), VertexId::Int(2)]);
    }

    #[test]
    fn zero_radius_ball_is_the_centres() {
        let c = set(&[VertexId::Int(0), VertexId::Int(5)]);
        let b = ball(&LineGraph, &c, 0).unwrap();
        assert_eq!(b.vertices.len(), 2);
        assert!(b.edges.is_empty());
    }

    #[test]
    fn cubic_tree_ball_has_ten_vertices() {
        let t = RegularTree::new(3).unwrap();
        assert_eq!(ball_around(&t, &t.root(), 2).unwrap().len(), 10);
    }

    #[test]
    fn line_minus_vertex_has_two_infinite_sides() {
        let cs = components_minus(&LineGraph, &set(&[VertexId::Int(0)]), 10).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.is_infinite()));
    }

    #[test]
    fn path_minus_middle_has_two_finite_sides() {
        let p = FiniteGraph::path(3);
        let cs = components_minus(&p, &set(&[VertexId::Int(1)]), 10).unwrap();
        assert_eq!(cs.iter().map(|c| c.verdict).collect::<Vec<_>>(), [Finiteness::Finite(1); 2]);
    }

    #[test]
    fn grid_minus_vertex_is_connected() {
        let cs = components_minus(&Grid2d, &set(&[VertexId::Pair(0, 0)]), 10).unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs[0].is_infinite());
    }

    #[test]
    fn empty_separator_gives_root_component() {
        let cs = components_minus(&LineGraph, &BTreeSet::new(), 3).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].seed, VertexId::Int(0));
    }

    #[test]
    fn locate_far_vertex() {
        let s = set(&[VertexId::Int(0), VertexId::Int(5)]);
        let cs = components_minus(&LineGraph, &s, 10).unwrap();
        assert_eq!(cs.len(), 3);
        let i = locate(&LineGraph, &s, &cs, &VertexId::Int(40)).unwrap();
        assert_eq!(cs[i].seed, VertexId::Int(6));
        assert_eq!(cs[locate(&LineGraph, &s, &cs, &VertexId::Int(3)).unwrap()].verdict, Finiteness::Finite(4));
    }
}
