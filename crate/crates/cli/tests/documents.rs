use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use accessibility_cli::document::*;
use accessibility_cli::CliError;
use accessibility_core::amalgam::AmalgamSpec;
use accessibility_core::catalog;
use accessibility_core::graph::LineGraph;
use accessibility_core::group::GroupAction;
use accessibility_core::separation::{decompose_into_tight, enumerate_tight, Separation, Side};
use accessibility_core::tree_decomp::{TreeDecomposition, TreeHandle};
use accessibility_core::{FiniteGraph, GraphHandle, VertexId};
use serde_json::{json, Value};

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn supports(a: &GroupAction) -> Vec<(String, Option<BTreeMap<VertexId, VertexId>>)> {
    a.generators.iter().map(|g| (g.tag().to_string(), g.support())).collect()
}

fn schema_pointer(e: CliError) -> String {
    match e {
        CliError::Schema { pointer, .. } => pointer,
        other => panic!("expected a schema error, got {other}"),
    }
}

#[test]
fn line_document_has_translation_and_reflection() {
    let g = parse_graph_document(r#"{"kind":"line"}"#).unwrap();
    let tags: Vec<&str> = g.action.generators.iter().map(|m| m.tag()).collect();
    assert_eq!(tags, ["shift", "flip"]);
    assert!(!g.graph.is_finite());
}

#[test]
fn triangle_document() {
    let g = parse_graph_document(&data("triangle.json")).unwrap();
    let f = g.finite().unwrap();
    assert_eq!((f.len(), f.edge_count()), (3, 3));
    assert_eq!(g.action.generators.len(), 2);
}

#[test]
fn non_automorphism_generator_is_rejected() {
    let doc = r#"{"kind":"finite","vertices":[0,1,2],"edges":[[0,1],[1,2]],
        "generators":[{"name":"bad","map":[[0,1],[1,0]]}]}"#;
    assert!(matches!(parse_graph_document(doc), Err(CliError::Validation(_))));
}

#[test]
fn schema_errors_carry_pointers() {
    let cases = [
        (r#"{"kind":"finite","vertices":[0,1],"edges":[[0,1],[1,5]]}"#, "/edges/1"),
        (r#"{"kind":"blob"}"#, "/kind"),
        (r#"{"kind":"finite","vertices":[0,"x"],"edges":[]}"#, "/vertices/1"),
        (r#"{"kind":"line","generators":["shift","spin"]}"#, "/generators/1"),
        (r#"{"kind":"tree"}"#, "/"),
        (r#"{"kind":"finite","vertices":[0],"edges":[],"colour":1}"#, "/"),
    ];
    for (doc, pointer) in cases {
        assert_eq!(schema_pointer(parse_graph_document(doc).unwrap_err()), pointer, "{doc}");
    }
    assert!(matches!(parse_graph_document("{"), Err(CliError::Json(_))));
}

#[test]
fn vertex_encodings_round_trip() {
    let vs = [
        VertexId::Int(-3),
        VertexId::Pair(2, -1),
        VertexId::Word(vec![]),
        VertexId::Word(vec![0, 2, 1]),
        VertexId::Class { node: vec![1, 3], local: 2 },
    ];
    for v in vs {
        let value = vertex_json(&v);
        assert_eq!(parse_vertex(Node::root(&value)).unwrap(), v);
        assert_eq!(parse_vertex_arg(&v.to_string()).unwrap(), v);
    }
    assert_eq!(parse_vertex_arg("1,2").unwrap(), VertexId::Pair(1, 2));
    assert!(parse_vertex_arg("w1.x").is_err());
}

fn graph_round_trip(g: &LoadedGraph) {
    let doc = graph_document(g).unwrap();
    let back = graph_from_value(Node::root(&doc)).unwrap();
    assert_eq!(graph_document(&back).unwrap(), doc);
    assert_eq!(supports(&back.action), supports(&g.action));
    assert_eq!(back.finite(), g.finite());
    assert_eq!(back.label(), g.label());
}

#[test]
fn graphs_round_trip() {
    graph_round_trip(&parse_graph_document(&data("triangle.json")).unwrap());
    for name in ["line", "grid2d", "ladder", "tree(3)", "tree(5)"] {
        graph_round_trip(&LoadedGraph::family(name).unwrap());
    }
    graph_round_trip(&LoadedGraph::from_finite(FiniteGraph::cycle(6), GroupAction::trivial()));
    graph_round_trip(&LoadedGraph::amalgam(catalog::double_ray()).unwrap());
    let shift_only = parse_graph_document(r#"{"kind":"line","generators":["shift"]}"#).unwrap();
    graph_round_trip(&shift_only);
}

fn spec_parts(s: &AmalgamSpec) -> impl PartialEq + std::fmt::Debug {
    let factors: Vec<_> = s
        .factors
        .iter()
        .map(|f| (f.graph.clone(), f.adhesion.clone(), supports(&f.action)))
        .collect();
    let type2 = s.type2.as_ref().map(|t| (t.identify.clone(), t.j.clone()));
    (s.name.clone(), factors, s.bonding.clone(), type2)
}

#[test]
fn catalog_specs_round_trip() {
    for spec in catalog::specs() {
        let doc = amalgam_document(&spec).unwrap();
        let back = parse_amalgam_document(&doc.to_string()).unwrap();
        assert_eq!(spec_parts(&back), spec_parts(&spec), "{}", spec.name);
        assert_eq!(amalgam_document(&back).unwrap(), doc);
    }
}

#[test]
fn spec_document_matches_catalog() {
    let from_file = parse_amalgam_document(&data("double_ray.json")).unwrap();
    let mut expected = catalog::double_ray();
    expected.name = "edge-chain".into();
    assert_eq!(spec_parts(&from_file), spec_parts(&expected));
    assert_eq!(spec_parts(&parse_amalgam_document(r#"{"catalog":"double-ray"}"#).unwrap()), spec_parts(&catalog::double_ray()));
}

#[test]
fn spec_schema_errors() {
    let one_factor = r#"{"name":"x","factors":[],"bonding":[]}"#;
    assert_eq!(schema_pointer(parse_amalgam_document(one_factor).unwrap_err()), "/factors");
    let unknown = r#"{"catalog":"no-such-spec"}"#;
    assert_eq!(schema_pointer(parse_amalgam_document(unknown).unwrap_err()), "/catalog");
}

fn all_separations(g: &GraphHandle, n: usize) -> Vec<Separation> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() > 2 {
            continue;
        }
        let s: BTreeSet<VertexId> = (0..n as i64).filter(|i| mask >> i & 1 == 1).map(VertexId::Int).collect();
        let c = Separation::with_sides(g, &s, |_| Ok(Side::A)).unwrap().a_side().len();
        for sides in 0u32..(1 << c) {
            let mut i = 0;
            out.push(
                Separation::with_sides(g, &s, |_| {
                    i += 1;
                    Ok(if sides >> (i - 1) & 1 == 1 { Side::B } else { Side::A })
                })
                .unwrap(),
            );
        }
    }
    out
}

#[test]
fn separations_and_expressions_round_trip() {
    let graphs = [FiniteGraph::path(5), FiniteGraph::cycle(5), FiniteGraph::star(4), FiniteGraph::complete(4)];
    let mut checked = 0;
    for f in graphs {
        let n = f.len();
        let g: GraphHandle = Arc::new(f);
        for x in all_separations(&g, n) {
            let doc = separation_document(&x);
            assert_eq!(separation_from_value(Node::root(&doc), &g).unwrap(), x);
            let e = decompose_into_tight(&x).unwrap();
            let edoc = expression_document(&e);
            assert_eq!(expression_from_value(Node::root(&edoc), &g).unwrap(), e);
            checked += 1;
        }
    }
    assert!(checked > 100);
    let line: GraphHandle = Arc::new(LineGraph);
    for x in enumerate_tight(&line, &VertexId::Int(0), 2, 3).unwrap() {
        let doc = separation_document(&x);
        assert_eq!(separation_from_value(Node::root(&doc), &line).unwrap(), x);
    }
}

#[test]
fn expression_operators() {
    let g: GraphHandle = Arc::new(FiniteGraph::path(3));
    let x = separation_document(&Separation::all_a(&g));
    let doc = json!(["*", x, ["+", x, x]]);
    let e = expression_from_value(Node::root(&doc), &g).unwrap();
    assert_eq!(e.leaves().len(), 3);
    assert_eq!(expression_document(&e)[0], Value::from("×"));
    let bad = json!(["-", x, x]);
    assert_eq!(schema_pointer(expression_from_value(Node::root(&bad), &g).unwrap_err()), "/0");
}

#[test]
fn seeds_in_the_separator_are_rejected() {
    let g: GraphHandle = Arc::new(FiniteGraph::path(3));
    let doc = json!({ "separator": [1], "sides": [{ "seed": 1, "side": "A" }] });
    assert!(separation_from_value(Node::root(&doc), &g).is_err());
}

#[test]
fn tree_decompositions_round_trip() {
    let loaded = parse_td_document(&data("p3_td.json")).unwrap();
    let doc = td_document(&loaded.graph, &loaded.td).unwrap();
    let back = td_from_value(Node::root(&doc)).unwrap();
    assert_eq!(td_document(&back.graph, &back.td).unwrap(), doc);

    let g = FiniteGraph::cycle(4);
    let handle: GraphHandle = Arc::new(g.clone());
    let tree = TreeHandle::finite(FiniteGraph::path(2)).unwrap();
    let parts = [(0, vec![0, 1, 2]), (1, vec![2, 3, 0])]
        .into_iter()
        .map(|(t, vs)| (VertexId::Int(t), vs.into_iter().map(VertexId::Int).collect()))
        .collect();
    let td = TreeDecomposition::finite(handle, tree, parts).unwrap();
    let graph = LoadedGraph::from_finite(g, GroupAction::trivial());
    let doc = td_document(&graph, &td).unwrap();
    let back = td_from_value(Node::root(&doc)).unwrap();
    assert_eq!(td_document(&back.graph, &back.td).unwrap(), doc);
}

#[test]
fn lazy_tree_decompositions_do_not_serialize() {
    let td = catalog::line_interval_td(1).unwrap();
    let g = LoadedGraph::family("line").unwrap();
    assert!(td_document(&g, &td).is_err());
}

#[test]
fn td_documents_need_a_tree() {
    let doc = r#"{"graph":{"kind":"finite","vertices":[0,1],"edges":[[0,1]]},
        "tree":{"nodes":[0,1,2],"edges":[[0,1],[1,2],[0,2]]},"parts":[]}"#;
    assert_eq!(schema_pointer(parse_td_document(doc).unwrap_err()), "/tree");
}

#[test]
fn scripts_round_trip() {
    let script = parse_process_script(&data("line_script.json")).unwrap();
    assert_eq!(script.max_steps, 4);
    assert_eq!(script.steps.len(), 2);
    assert_eq!(script.steps[1].spec.name, "double-ray");
    let doc = script_document(&script).unwrap();
    let back = script_from_value(Node::root(&doc)).unwrap();
    assert_eq!(script_document(&back).unwrap(), doc);
}
