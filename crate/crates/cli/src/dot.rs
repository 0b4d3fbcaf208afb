//! Graphviz DOT rendering of balls, tree-decompositions and separation expressions.

use std::collections::BTreeSet;
use std::fmt::Write;

use accessibility_core::explore::Ball;
use accessibility_core::separation::SeparationExpression;
use accessibility_core::tree_decomp::{part_window, TreeDecomposition};
use accessibility_core::{Result, VertexId};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn set_label<'a>(vs: impl IntoIterator<Item = &'a VertexId>) -> String {
    let items: Vec<String> = vs.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Vertices in canonical order; centres are drawn doubled, boundary vertices dashed.
pub fn ball_dot(ball: &Ball, name: &str) -> String {
    let boundary: BTreeSet<&VertexId> = ball.boundary.iter().collect();
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", quote(name));
    for v in &ball.vertices {
        let id = quote(&v.to_string());
        if ball.centers.contains(v) {
            let _ = writeln!(out, "  {id} [shape=doublecircle];");
        } else if boundary.contains(v) && ball.radius > 0 {
            let _ = writeln!(out, "  {id} [style=dashed];");
        } else {
            let _ = writeln!(out, "  {id};");
        }
    }
    for (u, v) in &ball.edges {
        let _ = writeln!(out, "  {} -- {};", quote(&u.to_string()), quote(&v.to_string()));
    }
    out.push_str("}\n");
    out
}

/// Tree nodes labelled by their parts; lazy decompositions are cut to the probe window.
pub fn td_dot(td: &TreeDecomposition, probe_radius: usize) -> Result<String> {
    let parts = part_window(td, probe_radius)?;
    let mut out = String::new();
    out.push_str("graph td {\n  node [shape=box];\n");
    for (t, part) in &parts {
        let label = format!("{t}: {}", set_label(part));
        let _ = writeln!(out, "  {} [label={}];", quote(&t.to_string()), quote(&label));
    }
    for t in parts.keys() {
        for u in td.tree.tree.neighbors(t)? {
            if *t < u && parts.contains_key(&u) {
                let _ = writeln!(out, "  {} -- {};", quote(&t.to_string()), quote(&u.to_string()));
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Operator tree, nodes numbered in preorder.
pub fn expression_dot(e: &SeparationExpression) -> String {
    fn walk(e: &SeparationExpression, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        match e {
            SeparationExpression::Leaf(x) => {
                let shape = if x.is_tight() { "box" } else { "ellipse" };
                let _ = writeln!(out, "  n{id} [shape={shape}, label={}];", quote(&x.to_string()));
            }
            SeparationExpression::Plus(a, b) | SeparationExpression::Times(a, b) => {
                let op = if matches!(e, SeparationExpression::Plus(..)) { "+" } else { "×" };
                let _ = writeln!(out, "  n{id} [shape=circle, label={}];", quote(op));
                for child in [a, b] {
                    let c = walk(child, next, out);
                    let _ = writeln!(out, "  n{id} -> n{c};");
                }
            }
        }
        id
    }
    let mut out = String::from("digraph expression {\n");
    walk(e, &mut 0, &mut out);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use accessibility_core::explore::ball_around;
    use accessibility_core::graph::LineGraph;

    #[test]
    fn line_ball_is_a_path() {
        let b = ball_around(&LineGraph, &VertexId::Int(0), 2).unwrap();
        let dot = ball_dot(&b, "line");
        assert_eq!(dot.matches(" -- ").count(), 4);
        assert_eq!(dot.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("--")).count(), 5);
        assert!(dot.contains("\"0\" [shape=doublecircle]"));
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
