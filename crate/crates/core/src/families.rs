//! Built-in lazy graph families with their standard automorphism generators.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::graph::{GraphHandle, Grid2d, Ladder, LineGraph, RegularTree};
use crate::group::{GraphMorphism, GroupAction, VertexMap};
use crate::vertex::VertexId;

fn int_map(f: fn(i64) -> i64) -> VertexMap {
    Arc::new(move |v: &VertexId| match v {
        VertexId::Int(i) => Ok(VertexId::Int(f(*i))),
        _ => Err(Error::InvalidVertex(v.clone())),
    })
}

fn pair_map(f: fn(i64, i64) -> (i64, i64)) -> VertexMap {
    Arc::new(move |v: &VertexId| match v {
        VertexId::Pair(x, y) => {
            let (a, b) = f(*x, *y);
            Ok(VertexId::Pair(a, b))
        }
        _ => Err(Error::InvalidVertex(v.clone())),
    })
}

fn word_map(f: impl Fn(&[u32]) -> Vec<u32> + Send + Sync + 'static) -> VertexMap {
    Arc::new(move |v: &VertexId| match v {
        VertexId::Word(w) => Ok(VertexId::Word(f(w))),
        _ => Err(Error::InvalidVertex(v.clone())),
    })
}

/// Translation by one and the reflection `i ↦ −i`.
pub fn line_action() -> GroupAction {
    GroupAction::new(vec![
        GraphMorphism::map("shift", int_map(|i| i + 1), int_map(|i| i - 1)),
        GraphMorphism::involution("flip", int_map(|i| -i)),
    ])
}

pub fn line_translations() -> GroupAction {
    GroupAction::new(vec![GraphMorphism::map("shift", int_map(|i| i + 1), int_map(|i| i - 1))])
}

/// Unit translations, the diagonal swap and the reflection in the y-axis.
pub fn grid_action() -> GroupAction {
    GroupAction::new(vec![
        GraphMorphism::map("shift-x", pair_map(|x, y| (x + 1, y)), pair_map(|x, y| (x - 1, y))),
        GraphMorphism::map("shift-y", pair_map(|x, y| (x, y + 1)), pair_map(|x, y| (x, y - 1))),
        GraphMorphism::involution("swap", pair_map(|x, y| (y, x))),
        GraphMorphism::involution("mirror", pair_map(|x, y| (-x, y))),
    ])
}

pub fn ladder_action() -> GroupAction {
    GroupAction::new(vec![
        GraphMorphism::map("shift", pair_map(|x, y| (x + 1, y)), pair_map(|x, y| (x - 1, y))),
        GraphMorphism::involution("rung-flip", pair_map(|x, y| (x, 1 - y))),
        GraphMorphism::involution("mirror", pair_map(|x, y| (-x, y))),
    ])
}

/// Left multiplication by each letter, plus letter permutations generating
/// the symmetric group on the letters.
pub fn tree_action(d: u32) -> GroupAction {
    let mut gens: Vec<GraphMorphism> = (0..d)
        .map(|c| {
            GraphMorphism::involution(
                format!("mul{c}"),
                word_map(move |w| {
                    if w.first() == Some(&c) {
                        w[1..].to_vec()
                    } else {
                        let mut out = vec![c];
                        out.extend_from_slice(w);
                        out
                    }
                }),
            )
        })
        .collect();
    gens.push(GraphMorphism::involution(
        "swap01",
        word_map(|w| w.iter().map(|&l| if l < 2 { 1 - l } else { l }).collect()),
    ));
    if d > 2 {
        gens.push(GraphMorphism::map(
            "cycle",
            word_map(move |w| w.iter().map(|&l| (l + 1) % d).collect()),
            word_map(move |w| w.iter().map(|&l| (l + d - 1) % d).collect()),
        ));
    }
    GroupAction::new(gens)
}

/// A built-in family by name: `line`, `grid2d`, `ladder` or `tree(d)`.
pub fn by_name(name: &str) -> Result<(GraphHandle, GroupAction)> {
    let name = name.trim();
    match name {
        "line" => Ok((Arc::new(LineGraph), line_action())),
        "grid2d" | "grid" => Ok((Arc::new(Grid2d), grid_action())),
        "ladder" => Ok((Arc::new(Ladder), ladder_action())),
        _ => {
            let d = name
                .strip_prefix("tree(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|d| d.trim().parse::<u32>().ok())
                .ok_or_else(|| domain!("unknown graph family {name:?}"))?;
            Ok((Arc::new(RegularTree::new(d)?), tree_action(d)))
        }
    }
}

pub fn names() -> Vec<String> {
    ["line", "grid2d", "ladder", "tree(3)"].iter().map(|s| String::from(*s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::ball_around;

    #[test]
    fn family_generators_are_automorphisms_on_balls() {
        for name in ["line", "grid2d", "ladder", "tree(3)", "tree(4)"] {
            let (g, a) = by_name(name).unwrap();
            let b = ball_around(g.as_ref(), &g.root(), 3).unwrap();
            a.check_on_ball(g.as_ref(), &b).unwrap();
        }
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(by_name("torus").is_err());
        assert!(by_name("tree(1)").is_err());
    }
}
