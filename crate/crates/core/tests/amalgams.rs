use accessibility_core::amalgam::{
    classify_type, construct_amalgam, corresponding_td, lifted_action, AmalgamType,
};
use accessibility_core::catalog;
use accessibility_core::explore::ball_around;
use accessibility_core::graph::LineGraph;
use accessibility_core::iso::balls_isomorphic;
use accessibility_core::process::{run_process, shipped_drivers, Factor, ProcessConfig};
use accessibility_core::tree_decomp::{induced_separation, is_invariant, separator_matches_adhesion, validate_td};
use accessibility_core::VertexId;

#[test]
fn double_ray_matches_the_line_up_to_radius_12() {
    let a = construct_amalgam(&catalog::double_ray()).unwrap();
    for r in 0..=12 {
        let mine = ball_around(a.graph.as_ref(), &a.graph.root(), r).unwrap();
        let line = ball_around(&LineGraph, &VertexId::Int(0), r).unwrap();
        assert!(balls_isomorphic(&mine, &line), "r = {r}");
    }
}

#[test]
fn catalog_decompositions_are_valid_and_invariant() {
    for spec in catalog::specs() {
        let a = construct_amalgam(&spec).unwrap();
        let td = corresponding_td(&a).unwrap();
        assert_eq!(validate_td(&td, 3).unwrap(), None, "{}", spec.name);
        let lifted = lifted_action(&a).unwrap();
        let report = is_invariant(&td, &lifted.graph_action, 2).unwrap();
        assert!(report.invariant, "{}: {:?}", spec.name, report.witness);
    }
}

#[test]
fn induced_separators_are_adhesion_sets() {
    for spec in catalog::specs() {
        let a = construct_amalgam(&spec).unwrap();
        let td = corresponding_td(&a).unwrap();
        let root = a.tree.root();
        for t in a.tree.neighbors(&root).unwrap() {
            assert!(separator_matches_adhesion(&td, &root, &t).unwrap(), "{}", spec.name);
            let x = induced_separation(&td, &root, &t).unwrap();
            let label = a.edge_label(&root, &t).unwrap();
            let expected: std::collections::BTreeSet<VertexId> = spec.factors[0].adhesion[&label]
                .iter()
                .map(|v| a.class_of(&root, v).unwrap())
                .collect();
            assert_eq!(x.separator(), &expected, "{}", spec.name);
            assert_eq!(x.order(), a.adhesion());
        }
    }
}

#[test]
fn classification_is_deterministic() {
    for spec in catalog::specs() {
        let a = construct_amalgam(&spec).unwrap();
        let (r1, r2) = (classify_type(&a, 6), classify_type(&a, 6));
        assert_eq!(r1.kind, r2.kind);
        assert_eq!(r1.type1_failures, r2.type1_failures);
        let w1: Vec<_> = r1.respects.iter().map(|e| (e.word.clone(), e.witness.clone())).collect();
        let w2: Vec<_> = r2.respects.iter().map(|e| (e.word.clone(), e.witness.clone())).collect();
        assert_eq!(w1, w2);
    }
    let kinds: Vec<(String, AmalgamType)> = catalog::specs()
        .into_iter()
        .map(|s| (s.name.clone(), classify_type(&construct_amalgam(&s).unwrap(), 6).kind))
        .collect();
    for (name, kind) in kinds {
        let expected = match name.as_str() {
            "double-ray-asymmetric" | "twisted-ladder" | "trivial-square" => AmalgamType::Neither,
            "double-ray-type2" => AmalgamType::Type2,
            _ => AmalgamType::Type1,
        };
        assert_eq!(kind, expected, "{name}");
    }
}

#[test]
fn drivers_agree_on_termination() {
    for family in ["line", "grid2d", "ladder", "tree(3)"] {
        let outcomes: Vec<(String, bool, usize)> = shipped_drivers(family)
            .into_iter()
            .map(|mut d| {
                let out = run_process(Factor::family(family).unwrap(), &mut d, 10, ProcessConfig::default()).unwrap();
                (d.name.clone(), out.terminated(), out.state().steps)
            })
            .collect();
        assert!(outcomes.iter().all(|o| o.1 == outcomes[0].1), "{family}: {outcomes:?}");
    }
}
