//! Built-in amalgamation specs and decompositions used by drivers, tests and the CLI.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::amalgam::{AmalgamSpec, FactorSpec, TypeTwo};
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, LineGraph};
use crate::group::{GraphMorphism, GroupAction};
use crate::tree_decomp::{NodesFn, PartFn, Parts, TreeDecomposition, TreeHandle};
use crate::vertex::VertexId;

fn ints(xs: &[i64]) -> Vec<VertexId> {
    xs.iter().map(|&x| VertexId::Int(x)).collect()
}

fn factor(graph: FiniteGraph, adhesion: &[(u32, &[i64])], gens: &[(&str, &[(i64, i64)])]) -> FactorSpec {
    let action = GroupAction::new(
        gens.iter().map(|(tag, pairs)| GraphMorphism::from_pairs(*tag, pairs).expect("catalog permutation")).collect(),
    );
    FactorSpec { graph, adhesion: adhesion.iter().map(|(k, s)| (*k, ints(s))).collect(), action }
}

fn bonds(maps: &[Bond<'_>]) -> BTreeMap<(u32, u32), Vec<(VertexId, VertexId)>> {
    maps.iter()
        .map(|(kl, pairs)| (*kl, pairs.iter().map(|&(x, y)| (VertexId::Int(x), VertexId::Int(y))).collect()))
        .collect()
}

fn spec(name: &str, factors: [FactorSpec; 2], bonding: &[Bond<'_>]) -> AmalgamSpec {
    AmalgamSpec { name: name.to_string(), factors, bonding: bonds(bonding), type2: None }
}

/// A bonding map given by its `(k, ℓ)` labels and vertex pairs.
type Bond<'a> = ((u32, u32), &'a [(i64, i64)]);
type OwnedBond = ((u32, u32), Vec<(i64, i64)>);

const SWAP01: (&str, &[(i64, i64)]) = ("swap", &[(0, 1), (1, 0)]);

/// `P2 ∗ P2`: copies of an edge glued end to end, the double ray.
pub fn double_ray() -> AmalgamSpec {
    let g = FiniteGraph::path(2);
    spec(
        "double-ray",
        [
            factor(g.clone(), &[(1, &[0]), (2, &[1])], &[SWAP01]),
            factor(g, &[(3, &[0]), (4, &[1])], &[SWAP01]),
        ],
        &[((1, 3), &[(0, 0)]), ((1, 4), &[(0, 1)]), ((2, 3), &[(1, 0)]), ((2, 4), &[(1, 1)])],
    )
}

/// The double ray without declared symmetry: consistency fails and no `J` is given.
pub fn double_ray_asymmetric() -> AmalgamSpec {
    let mut s = double_ray();
    s.name = "double-ray-asymmetric".into();
    for f in &mut s.factors {
        f.action = GroupAction::trivial();
    }
    s
}

/// The double ray as a self-amalgamation of Type 2 with `J = {1}`.
pub fn double_ray_type2() -> AmalgamSpec {
    let mut s = double_ray_asymmetric();
    s.name = "double-ray-type2".into();
    s.type2 = Some(TypeTwo { identify: [(3, 1), (4, 2)].into_iter().collect(), j: [1].into_iter().collect() });
    s
}

/// `P3 ∗ P3` glued at the path ends: another factorisation of the double ray.
pub fn path3_line() -> AmalgamSpec {
    let g = FiniteGraph::path(3);
    let flip: (&str, &[(i64, i64)]) = ("flip", &[(0, 2), (2, 0)]);
    spec(
        "path3-line",
        [factor(g.clone(), &[(1, &[0]), (2, &[2])], &[flip]), factor(g, &[(3, &[0]), (4, &[2])], &[flip])],
        &[((1, 3), &[(0, 0)]), ((1, 4), &[(0, 2)]), ((2, 3), &[(2, 0)]), ((2, 4), &[(2, 2)])],
    )
}

/// `K1 ∗ P2` with `degree` labels on the single vertex: the `degree`-regular tree.
pub fn star_path(degree: u32) -> AmalgamSpec {
    let k1 = FiniteGraph::from_edges("K1", 1, &[]).expect("K1");
    let labels: Vec<(u32, &[i64])> = (1..=degree).map(|k| (k, &[0][..])).collect();
    let (a, b) = (degree + 1, degree + 2);
    let mut maps: Vec<Bond<'_>> = Vec::new();
    for k in 1..=degree {
        maps.push(((k, a), &[(0, 0)]));
        maps.push(((k, b), &[(0, 1)]));
    }
    spec(
        &format!("star-path({degree})"),
        [factor(k1, &labels, &[]), factor(FiniteGraph::path(2), &[(a, &[0]), (b, &[1])], &[SWAP01])],
        &maps,
    )
}

const STAR_GENS: [(&str, &[(i64, i64)]); 2] = [("(12)", &[(1, 2), (2, 1)]), ("(123)", &[(1, 2), (2, 3), (3, 1)])];

/// `K1,3 ∗ K1,3` glued along leaves: the subdivided 3-regular tree.
pub fn star_leaves() -> AmalgamSpec {
    let g = FiniteGraph::star(3);
    let mut maps: Vec<OwnedBond> = Vec::new();
    for k in 1..=3u32 {
        for l in 4..=6u32 {
            maps.push(((k, l), vec![(k as i64, l as i64 - 3)]));
        }
    }
    let maps: Vec<Bond<'_>> = maps.iter().map(|(kl, p)| (*kl, p.as_slice())).collect();
    spec(
        "star-leaves",
        [
            factor(g.clone(), &[(1, &[1]), (2, &[2]), (3, &[3])], &STAR_GENS),
            factor(g, &[(4, &[1]), (5, &[2]), (6, &[3])], &STAR_GENS),
        ],
        &maps,
    )
}

/// `K1,3 ∗ K1,3` glued along edges, centre onto leaf: the 3-regular tree
/// with identification size 4.
pub fn star_edges() -> AmalgamSpec {
    let g = FiniteGraph::star(3);
    let mut maps: Vec<OwnedBond> = Vec::new();
    for k in 1..=3u32 {
        for m in 1..=3u32 {
            maps.push(((k, m + 3), vec![(0, m as i64), (k as i64, 0)]));
        }
    }
    let maps: Vec<Bond<'_>> = maps.iter().map(|(kl, p)| (*kl, p.as_slice())).collect();
    spec(
        "star-edges",
        [
            factor(g.clone(), &[(1, &[0, 1]), (2, &[0, 2]), (3, &[0, 3])], &STAR_GENS),
            factor(g, &[(4, &[0, 1]), (5, &[0, 2]), (6, &[0, 3])], &STAR_GENS),
        ],
        &maps,
    )
}

const LADDER_MAPS: [Bond<'static>; 4] = [
    ((1, 3), &[(0, 0), (3, 3)]),
    ((1, 4), &[(0, 1), (3, 2)]),
    ((2, 3), &[(1, 0), (2, 3)]),
    ((2, 4), &[(1, 1), (2, 2)]),
];

/// `C4 ∗ C4` glued rung to rung: the ladder.
pub fn square_ladder() -> AmalgamSpec {
    let g = FiniteGraph::cycle(4);
    let mirror: (&str, &[(i64, i64)]) = ("mirror", &[(0, 1), (1, 0), (2, 3), (3, 2)]);
    spec(
        "square-ladder",
        [
            factor(g.clone(), &[(1, &[0, 3]), (2, &[1, 2])], &[mirror]),
            factor(g, &[(3, &[0, 3]), (4, &[1, 2])], &[mirror]),
        ],
        &LADDER_MAPS,
    )
}

/// The square ladder with one bonding map twisted, so no consistency witness exists.
pub fn twisted_ladder() -> AmalgamSpec {
    let mut s = square_ladder();
    s.name = "twisted-ladder".into();
    s.bonding.insert((2, 4), vec![(VertexId::Int(1), VertexId::Int(2)), (VertexId::Int(2), VertexId::Int(1))]);
    s
}

/// Two-rung-long ladder pieces (`P2 × P3`) glued at their end rungs.
pub fn domino_ladder() -> AmalgamSpec {
    // vertex 2c + r sits in column c, rail r
    let g = FiniteGraph::from_edges("P2xP3", 6, &[(0, 1), (2, 3), (4, 5), (0, 2), (2, 4), (1, 3), (3, 5)]).expect("domino");
    let mirror: (&str, &[(i64, i64)]) = ("mirror", &[(0, 4), (4, 0), (1, 5), (5, 1)]);
    spec(
        "domino-ladder",
        [
            factor(g.clone(), &[(1, &[0, 1]), (2, &[4, 5])], &[mirror]),
            factor(g, &[(3, &[0, 1]), (4, &[4, 5])], &[mirror]),
        ],
        &[
            ((1, 3), &[(0, 0), (1, 1)]),
            ((1, 4), &[(0, 4), (1, 5)]),
            ((2, 3), &[(4, 0), (5, 1)]),
            ((2, 4), &[(4, 4), (5, 5)]),
        ],
    )
}

/// `C4 ∗ P2` where the second factor is a single adhesion set covering it: a trivial amalgam.
pub fn trivial_square() -> AmalgamSpec {
    spec(
        "trivial-square",
        [factor(FiniteGraph::cycle(4), &[(1, &[0, 1])], &[]), factor(FiniteGraph::path(2), &[(2, &[0, 1])], &[SWAP01])],
        &[((1, 2), &[(0, 0), (1, 1)])],
    )
}

/// Two copies of `P3` glued at their ends: `C4`, split without any ends to separate.
pub fn path_square() -> AmalgamSpec {
    let g = FiniteGraph::path(3);
    let flip: (&str, &[(i64, i64)]) = ("flip", &[(0, 2), (2, 0)]);
    spec(
        "path-square",
        [factor(g.clone(), &[(1, &[0, 2])], &[flip]), factor(g, &[(2, &[0, 2])], &[flip])],
        &[((1, 2), &[(0, 0), (2, 2)])],
    )
}

/// Every named spec.
pub fn specs() -> Vec<AmalgamSpec> {
    vec![
        double_ray(),
        double_ray_asymmetric(),
        double_ray_type2(),
        path3_line(),
        star_path(2),
        star_path(3),
        star_leaves(),
        star_edges(),
        square_ladder(),
        twisted_ladder(),
        domino_ladder(),
        trivial_square(),
        path_square(),
    ]
}

pub fn spec_by_name(name: &str) -> Result<AmalgamSpec> {
    specs()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Domain(format!("unknown spec {name:?}; known: {}", spec_names().join(", "))))
}

pub fn spec_names() -> Vec<String> {
    specs().into_iter().map(|s| s.name).collect()
}

/// Parts `{i, …, i + width}` over the line, indexed by a second copy of the line.
pub fn line_interval_td(width: i64) -> Result<TreeDecomposition> {
    if width < 1 {
        return Err(Error::Domain("interval width must be positive".into()));
    }
    let part: PartFn = Arc::new(move |t: &VertexId| {
        let i = t.int().ok_or_else(|| Error::InvalidVertex(t.clone()))?;
        Ok((i..=i + width).map(VertexId::Int).collect::<BTreeSet<_>>())
    });
    let nodes_of: NodesFn = Arc::new(move |v: &VertexId| {
        let i = v.int().ok_or_else(|| Error::InvalidVertex(v.clone()))?;
        Ok((i - width..=i).map(VertexId::Int).collect())
    });
    Ok(TreeDecomposition {
        graph: Arc::new(LineGraph),
        tree: TreeHandle::lazy(Arc::new(LineGraph), vec![VertexId::Int(0)])?,
        parts: Parts::Lazy { part, nodes_of },
        adhesion_bound: Some(width as usize),
    })
}
