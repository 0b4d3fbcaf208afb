//! JSON documents: graphs, separations, expressions, tree-decompositions,
//! amalgamation specs and process scripts.
//!
//! Vertices are encoded by shape: an integer, a `[x, y]` pair, `{"word": [..]}`
//! for tree words, and `{"node": [..], "local": n}` for amalgam classes.
//! Parsing walks a [`serde_json::Value`] so that schema errors carry the JSON
//! pointer of the offending value.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use accessibility_core::amalgam::{construct_amalgam, lifted_action, AmalgamSpec, FactorSpec, TypeTwo};
use accessibility_core::catalog;
use accessibility_core::families;
use accessibility_core::group::{GraphMorphism, GroupAction};
use accessibility_core::process::ProcessConfig;
use accessibility_core::separation::{Separation, SeparationExpression, Side};
use accessibility_core::tree_decomp::{Parts, TreeDecomposition, TreeHandle};
use accessibility_core::{FiniteGraph, GraphHandle, VertexId};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// A JSON value together with its location in the document.
#[derive(Clone, Copy)]
pub struct Node<'a> {
    value: &'a Value,
    pointer: &'a str,
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

impl<'a> Node<'a> {
    pub fn root(value: &'a Value) -> Self {
        Node { value, pointer: "" }
    }

    pub fn pointer(&self) -> &str {
        self.pointer
    }

    pub fn value(&self) -> &'a Value {
        self.value
    }

    fn err(&self, message: impl Into<String>) -> CliError {
        CliError::schema(self.pointer, message)
    }

    fn object(&self) -> CliResult<&'a Map<String, Value>> {
        self.value.as_object().ok_or_else(|| self.err("expected an object"))
    }

    fn array(&self) -> CliResult<&'a Vec<Value>> {
        self.value.as_array().ok_or_else(|| self.err("expected an array"))
    }

    fn str(&self) -> CliResult<&'a str> {
        self.value.as_str().ok_or_else(|| self.err("expected a string"))
    }

    fn int(&self) -> CliResult<i64> {
        self.value.as_i64().ok_or_else(|| self.err("expected an integer"))
    }

    fn uint(&self) -> CliResult<u64> {
        self.value.as_u64().ok_or_else(|| self.err("expected a non-negative integer"))
    }

    fn label(&self) -> CliResult<u32> {
        u32::try_from(self.uint()?).map_err(|_| self.err("label out of range"))
    }

    fn has(&self, key: &str) -> bool {
        self.value.get(key).is_some()
    }
}

/// Runs `f` on the child at `key`; pointers are built on the fly.
fn with_field<T>(n: Node<'_>, key: &str, f: impl FnOnce(Node<'_>) -> CliResult<T>) -> CliResult<T> {
    let obj = n.object()?;
    let child = format!("{}/{}", n.pointer, escape(key));
    match obj.get(key) {
        Some(v) => f(Node { value: v, pointer: &child }),
        None => Err(CliError::schema(n.pointer, format!("missing field {key:?}"))),
    }
}

fn with_opt_field<T>(n: Node<'_>, key: &str, f: impl FnOnce(Node<'_>) -> CliResult<T>) -> CliResult<Option<T>> {
    if n.object()?.contains_key(key) {
        with_field(n, key, f).map(Some)
    } else {
        Ok(None)
    }
}

fn each<T>(n: Node<'_>, mut f: impl FnMut(Node<'_>) -> CliResult<T>) -> CliResult<Vec<T>> {
    let items = n.array()?;
    let mut out = Vec::with_capacity(items.len());
    for (i, v) in items.iter().enumerate() {
        let child = format!("{}/{i}", n.pointer);
        out.push(f(Node { value: v, pointer: &child })?);
    }
    Ok(out)
}

fn pair_of<T>(n: Node<'_>, f: impl Fn(Node<'_>) -> CliResult<T>) -> CliResult<(T, T)> {
    let items = each(n, f)?;
    let mut it = items.into_iter();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(n.err("expected a pair")),
    }
}

fn check_keys(n: Node<'_>, allowed: &[&str]) -> CliResult<()> {
    for k in n.object()?.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(n.err(format!("unknown field {k:?}")));
        }
    }
    Ok(())
}

pub fn parse_json(text: &str) -> CliResult<Value> {
    Ok(serde_json::from_str(text)?)
}

// vertices

pub fn vertex_json(v: &VertexId) -> Value {
    match v {
        VertexId::Int(i) => json!(i),
        VertexId::Pair(x, y) => json!([x, y]),
        VertexId::Word(w) => json!({ "word": w }),
        VertexId::Class { node, local } => json!({ "node": node, "local": local }),
    }
}

pub fn parse_vertex(n: Node<'_>) -> CliResult<VertexId> {
    match n.value {
        Value::Number(_) => Ok(VertexId::Int(n.int()?)),
        Value::Array(_) => {
            let (x, y) = pair_of(n, |c| c.int())?;
            Ok(VertexId::Pair(x, y))
        }
        Value::Object(o) if o.contains_key("word") => {
            check_keys(n, &["word"])?;
            Ok(VertexId::Word(with_field(n, "word", |w| each(w, |l| l.label()))?))
        }
        Value::Object(_) => {
            check_keys(n, &["node", "local"])?;
            let node = with_field(n, "node", |w| each(w, |l| l.label()))?;
            let local = with_field(n, "local", |l| l.label())?;
            Ok(VertexId::Class { node, local })
        }
        _ => Err(n.err("expected a vertex: integer, [x, y], {\"word\": [...]} or {\"node\": [...], \"local\": n}")),
    }
}

fn vertex_list(n: Node<'_>) -> CliResult<Vec<VertexId>> {
    each(n, parse_vertex)
}

fn vertices_json<'a>(vs: impl IntoIterator<Item = &'a VertexId>) -> Value {
    Value::Array(vs.into_iter().map(vertex_json).collect())
}

/// Parses a command-line vertex in its display form: `3`, `(1,2)` or `1,2`,
/// `w0.1` (`e` or `w` for the empty word) and `[0.1]2`.
pub fn parse_vertex_arg(s: &str) -> CliResult<VertexId> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("cannot parse vertex {s:?}"));
    let word = |w: &str| -> CliResult<Vec<u32>> {
        if w.is_empty() || w == "e" {
            return Ok(Vec::new());
        }
        w.split('.').map(|l| l.parse::<u32>().map_err(|_| bad())).collect()
    };
    if let Ok(i) = s.parse::<i64>() {
        return Ok(VertexId::Int(i));
    }
    if s == "e" {
        return Ok(VertexId::Word(Vec::new()));
    }
    if let Some(w) = s.strip_prefix('w') {
        return Ok(VertexId::Word(word(w)?));
    }
    if let Some(rest) = s.strip_prefix('[') {
        let (node, local) = rest.split_once(']').ok_or_else(bad)?;
        return Ok(VertexId::Class { node: word(node)?, local: local.parse().map_err(|_| bad())? });
    }
    let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(s);
    let (x, y) = inner.split_once(',').ok_or_else(bad)?;
    Ok(VertexId::Pair(x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

// graphs

#[derive(Clone, Debug)]
pub enum GraphSource {
    Finite(FiniteGraph),
    /// A built-in family, by name.
    Family(String),
    Amalgam(Box<AmalgamSpec>),
}

/// A graph with its declared action, as loaded from a document or a name.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub source: GraphSource,
    pub graph: GraphHandle,
    pub action: GroupAction,
}

impl LoadedGraph {
    /// Label used for process factors: the family name, graph name or spec name.
    pub fn label(&self) -> String {
        match &self.source {
            GraphSource::Finite(g) => g.name().to_string(),
            GraphSource::Family(name) => name.clone(),
            GraphSource::Amalgam(spec) => spec.name.clone(),
        }
    }

    pub fn finite(&self) -> Option<&FiniteGraph> {
        match &self.source {
            GraphSource::Finite(g) => Some(g),
            _ => None,
        }
    }

    pub fn family(name: &str) -> CliResult<Self> {
        let (graph, action) = families::by_name(name)?;
        let name = if name.trim() == "grid" { "grid2d".to_string() } else { name.trim().to_string() };
        Ok(LoadedGraph { source: GraphSource::Family(name), graph, action })
    }

    pub fn amalgam(spec: AmalgamSpec) -> CliResult<Self> {
        let a = construct_amalgam(&spec)?;
        let lifted = lifted_action(&a)?;
        Ok(LoadedGraph { graph: a.graph.clone(), action: lifted.graph_action, source: GraphSource::Amalgam(Box::new(spec)) })
    }

    pub fn from_finite(g: FiniteGraph, action: GroupAction) -> Self {
        LoadedGraph { graph: Arc::new(g.clone()), source: GraphSource::Finite(g), action }
    }
}

fn finite_graph(n: Node<'_>, name: String, vertex_key: &str) -> CliResult<FiniteGraph> {
    let vertices = with_field(n, vertex_key, vertex_list)?;
    let declared: BTreeSet<&VertexId> = vertices.iter().collect();
    if declared.len() != vertices.len() {
        return Err(CliError::schema(&format!("{}/{vertex_key}", n.pointer), "repeated vertex"));
    }
    let edges = with_field(n, "edges", |e| {
        each(e, |p| {
            let (u, v) = pair_of(p, parse_vertex)?;
            for x in [&u, &v] {
                if !declared.contains(x) {
                    return Err(p.err(format!("edge endpoint {x} is not a declared vertex")));
                }
            }
            if u == v {
                return Err(p.err(format!("self-loop at {u}")));
            }
            Ok((u, v))
        })
    })?;
    Ok(FiniteGraph::new(name, vertices, edges)?)
}

fn permutation_generators(n: Node<'_>, g: &FiniteGraph) -> CliResult<Vec<GraphMorphism>> {
    each(n, |gen| {
        check_keys(gen, &["name", "map"])?;
        let tag = with_field(gen, "name", |t| t.str().map(str::to_string))?;
        let pairs = with_field(gen, "map", |m| each(m, |p| pair_of(p, parse_vertex)))?;
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            for x in [&a, &b] {
                if g.index_of(x).is_none() {
                    return Err(gen.err(format!("generator {tag} moves undeclared vertex {x}")));
                }
            }
            if map.insert(a.clone(), b).is_some() {
                return Err(gen.err(format!("generator {tag} maps {a} twice")));
            }
        }
        let morphism = GraphMorphism::permutation(tag.clone(), map.clone())?;
        let mut total = map;
        for v in g.vertex_list() {
            total.entry(v.clone()).or_insert_with(|| v.clone());
        }
        if !g.is_automorphism(&total) {
            return Err(CliError::Validation(format!("generator {tag} is not an automorphism of {}", g.name())));
        }
        Ok(morphism)
    })
}

fn family_generators(n: Node<'_>, action: GroupAction) -> CliResult<GroupAction> {
    let names = each(n, |t| t.str().map(str::to_string))?;
    let mut gens = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let g = action
            .generators
            .iter()
            .find(|g| g.tag() == name)
            .ok_or_else(|| CliError::schema(&format!("{}/{i}", n.pointer), format!("unknown generator {name:?}")))?;
        gens.push(g.clone());
    }
    Ok(GroupAction::new(gens).with_budget(action.budget))
}

/// Parses a graph document and runs the load-time checks.
pub fn parse_graph_document(text: &str) -> CliResult<LoadedGraph> {
    let value = parse_json(text)?;
    graph_from_value(Node::root(&value))
}

pub fn graph_from_value(n: Node<'_>) -> CliResult<LoadedGraph> {
    check_keys(n, &["kind", "name", "vertices", "edges", "generators", "degree", "spec"])?;
    let kind = with_field(n, "kind", |k| k.str().map(str::to_string))?;
    match kind.as_str() {
        "finite" => {
            let name = with_opt_field(n, "name", |t| t.str().map(str::to_string))?.unwrap_or_else(|| "finite".into());
            let g = finite_graph(n, name, "vertices")?;
            let gens = with_opt_field(n, "generators", |gs| permutation_generators(gs, &g))?.unwrap_or_default();
            Ok(LoadedGraph::from_finite(g, GroupAction::new(gens)))
        }
        "line" | "grid2d" | "ladder" | "tree" => {
            let name = if kind == "tree" {
                let d = with_field(n, "degree", |d| d.uint())?;
                format!("tree({d})")
            } else {
                kind.clone()
            };
            let mut loaded = LoadedGraph::family(&name).map_err(|e| CliError::schema(n.pointer, e.to_string()))?;
            if let Some(action) = with_opt_field(n, "generators", |gs| family_generators(gs, loaded.action.clone()))? {
                loaded.action = action;
            }
            Ok(loaded)
        }
        "amalgam-ref" => {
            let spec = with_field(n, "spec", amalgam_from_value)?;
            LoadedGraph::amalgam(spec)
        }
        other => Err(CliError::schema(&format!("{}/kind", n.pointer), format!("unknown graph kind {other:?}"))),
    }
}

fn finite_graph_json(g: &FiniteGraph, action: &GroupAction) -> CliResult<Value> {
    let mut gens = Vec::new();
    for m in &action.generators {
        let support = m
            .support()
            .ok_or_else(|| CliError::Validation(format!("generator {} is not a finite permutation", m.tag())))?;
        let map: Vec<Value> = support.iter().map(|(a, b)| json!([vertex_json(a), vertex_json(b)])).collect();
        gens.push(json!({ "name": m.tag(), "map": map }));
    }
    let edges: Vec<Value> = g.edges().iter().map(|(u, v)| json!([vertex_json(u), vertex_json(v)])).collect();
    Ok(json!({
        "kind": "finite",
        "name": g.name(),
        "vertices": vertices_json(g.vertex_list()),
        "edges": edges,
        "generators": gens,
    }))
}

pub fn graph_document(g: &LoadedGraph) -> CliResult<Value> {
    match &g.source {
        GraphSource::Finite(f) => finite_graph_json(f, &g.action),
        GraphSource::Family(name) => {
            let gens: Vec<&str> = g.action.generators.iter().map(|m| m.tag()).collect();
            match name.strip_prefix("tree(").and_then(|r| r.strip_suffix(')')) {
                Some(d) => Ok(json!({ "kind": "tree", "degree": d.parse::<u64>().unwrap_or(0), "generators": gens })),
                None => Ok(json!({ "kind": name, "generators": gens })),
            }
        }
        GraphSource::Amalgam(spec) => Ok(json!({ "kind": "amalgam-ref", "spec": amalgam_document(spec)? })),
    }
}

/// Resolves a `--graph` argument: a family name, `spec:NAME` for a catalog
/// amalgam, or a path to a graph document. File contents are returned for
/// the report digest.
pub fn resolve_graph(arg: &str) -> CliResult<(LoadedGraph, Option<Vec<u8>>)> {
    if let Some(name) = arg.strip_prefix("spec:") {
        return Ok((LoadedGraph::amalgam(catalog::spec_by_name(name)?)?, None));
    }
    if families::by_name(arg).is_ok() {
        return Ok((LoadedGraph::family(arg)?, None));
    }
    let bytes = read_file(arg)?;
    let text = utf8(arg, &bytes)?;
    Ok((parse_graph_document(text)?, Some(bytes)))
}

pub fn read_file(path: &str) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn utf8<'a>(path: &str, bytes: &'a [u8]) -> CliResult<&'a str> {
    std::str::from_utf8(bytes).map_err(|e| CliError::Validation(format!("{path} is not UTF-8: {e}")))
}

// separations and expressions

pub fn separation_document(x: &Separation) -> Value {
    let mut sides = Vec::new();
    for (side, comps) in [("A", x.a_side()), ("B", x.b_side())] {
        for c in comps {
            sides.push(json!({ "seed": vertex_json(&c.seed), "side": side }));
        }
    }
    json!({ "separator": vertices_json(x.separator()), "sides": sides })
}

pub fn separation_from_value(n: Node<'_>, g: &GraphHandle) -> CliResult<Separation> {
    check_keys(n, &["separator", "sides"])?;
    let separator: BTreeSet<VertexId> = with_field(n, "separator", vertex_list)?.into_iter().collect();
    let sides = with_field(n, "sides", |s| {
        each(s, |e| {
            check_keys(e, &["seed", "side"])?;
            let seed = with_field(e, "seed", parse_vertex)?;
            let side = with_field(e, "side", |t| match t.str()? {
                "A" => Ok(Side::A),
                "B" => Ok(Side::B),
                other => Err(t.err(format!("side must be \"A\" or \"B\", got {other:?}"))),
            })?;
            Ok((seed, side))
        })
    })?;
    let mut assignment = BTreeMap::new();
    for (seed, side) in sides {
        if separator.contains(&seed) {
            return Err(CliError::schema(n.pointer, format!("seed {seed} lies in the separator")));
        }
        assignment.insert(seed, side);
    }
    Ok(Separation::new(g, &separator, &assignment)?)
}

pub fn expression_document(e: &SeparationExpression) -> Value {
    match e {
        SeparationExpression::Leaf(x) => separation_document(x),
        SeparationExpression::Plus(a, b) => json!(["+", expression_document(a), expression_document(b)]),
        SeparationExpression::Times(a, b) => json!(["×", expression_document(a), expression_document(b)]),
    }
}

pub fn expression_from_value(n: Node<'_>, g: &GraphHandle) -> CliResult<SeparationExpression> {
    if n.value.is_object() {
        return Ok(SeparationExpression::Leaf(separation_from_value(n, g)?));
    }
    let items = n.array()?;
    if items.len() != 3 {
        return Err(n.err("expected [operator, left, right]"));
    }
    let op = items[0].as_str().ok_or_else(|| CliError::schema(&format!("{}/0", n.pointer), "expected \"+\" or \"×\""))?;
    let left_ptr = format!("{}/1", n.pointer);
    let right_ptr = format!("{}/2", n.pointer);
    let left = expression_from_value(Node { value: &items[1], pointer: &left_ptr }, g)?;
    let right = expression_from_value(Node { value: &items[2], pointer: &right_ptr }, g)?;
    match op {
        "+" => Ok(SeparationExpression::plus(left, right)),
        "×" | "*" => Ok(SeparationExpression::times(left, right)),
        other => Err(CliError::schema(&format!("{}/0", n.pointer), format!("unknown operator {other:?}"))),
    }
}

// tree-decompositions

/// A finite tree-decomposition together with the graph document it refers to.
#[derive(Clone, Debug)]
pub struct LoadedTd {
    pub graph: LoadedGraph,
    pub td: TreeDecomposition,
}

pub fn td_document(graph: &LoadedGraph, td: &TreeDecomposition) -> CliResult<Value> {
    let Parts::Finite(parts) = &td.parts else {
        return Err(CliError::Validation("only finite tree-decompositions serialize".into()));
    };
    let nodes = td
        .tree
        .tree
        .vertices()
        .ok_or_else(|| CliError::Validation("only finite decomposition trees serialize".into()))?;
    let mut edges = Vec::new();
    for u in &nodes {
        for v in td.tree.tree.neighbors(u)? {
            if *u < v {
                edges.push(json!([vertex_json(u), vertex_json(&v)]));
            }
        }
    }
    let parts: Vec<Value> =
        parts.iter().map(|(t, p)| json!({ "node": vertex_json(t), "vertices": vertices_json(p) })).collect();
    Ok(json!({
        "graph": graph_document(graph)?,
        "tree": { "nodes": vertices_json(&nodes), "edges": edges },
        "parts": parts,
    }))
}

pub fn parse_td_document(text: &str) -> CliResult<LoadedTd> {
    let value = parse_json(text)?;
    td_from_value(Node::root(&value))
}

pub fn td_from_value(n: Node<'_>) -> CliResult<LoadedTd> {
    check_keys(n, &["graph", "tree", "parts"])?;
    let graph = with_field(n, "graph", graph_from_value)?;
    let tree = with_field(n, "tree", |t| {
        check_keys(t, &["nodes", "edges"])?;
        let g = finite_graph(t, "tree".into(), "nodes")?;
        TreeHandle::finite(g).map_err(|e| t.err(e.to_string()))
    })?;
    let parts = with_field(n, "parts", |ps| {
        each(ps, |p| {
            check_keys(p, &["node", "vertices"])?;
            let node = with_field(p, "node", parse_vertex)?;
            if !tree.tree.contains(&node) {
                return Err(p.err(format!("{node} is not a tree node")));
            }
            let vs: BTreeSet<VertexId> = with_field(p, "vertices", vertex_list)?.into_iter().collect();
            for v in &vs {
                if !graph.graph.contains(v) {
                    return Err(p.err(format!("{v} is not a vertex of {}", graph.graph.name())));
                }
            }
            Ok((node, vs))
        })
    })?;
    let mut map = BTreeMap::new();
    for (t, vs) in parts {
        if map.insert(t.clone(), vs).is_some() {
            return Err(CliError::schema(&format!("{}/parts", n.pointer), format!("node {t} listed twice")));
        }
    }
    let td = TreeDecomposition::finite(graph.graph.clone(), tree, map)?;
    Ok(LoadedTd { graph, td })
}

// amalgamation specs

pub fn amalgam_document(spec: &AmalgamSpec) -> CliResult<Value> {
    let mut factors = Vec::new();
    for f in &spec.factors {
        let adhesion: Vec<Value> =
            f.adhesion.iter().map(|(k, s)| json!({ "label": k, "vertices": vertices_json(s) })).collect();
        factors.push(json!({ "graph": finite_graph_json(&f.graph, &f.action)?, "adhesion": adhesion }));
    }
    let bonding: Vec<Value> = spec
        .bonding
        .iter()
        .map(|((k, l), pairs)| {
            let pairs: Vec<Value> = pairs.iter().map(|(x, y)| json!([vertex_json(x), vertex_json(y)])).collect();
            json!({ "from": k, "to": l, "pairs": pairs })
        })
        .collect();
    let mut doc = json!({ "name": spec.name, "factors": factors, "bonding": bonding });
    if let Some(t) = &spec.type2 {
        let identify: Vec<Value> = t.identify.iter().map(|(a, b)| json!([a, b])).collect();
        doc["type2"] = json!({ "identify": identify, "j": t.j });
    }
    Ok(doc)
}

pub fn parse_amalgam_document(text: &str) -> CliResult<AmalgamSpec> {
    let value = parse_json(text)?;
    amalgam_from_value(Node::root(&value))
}

/// An amalgamation spec: a catalog name (string or `{"catalog": name}`) or a full document.
pub fn amalgam_from_value(n: Node<'_>) -> CliResult<AmalgamSpec> {
    if let Some(name) = n.value.as_str() {
        return catalog::spec_by_name(name).map_err(|e| n.err(e.to_string()));
    }
    if n.has("catalog") {
        check_keys(n, &["catalog"])?;
        return with_field(n, "catalog", |c| catalog::spec_by_name(c.str()?).map_err(|e| c.err(e.to_string())));
    }
    check_keys(n, &["name", "factors", "bonding", "type2"])?;
    let name = with_field(n, "name", |t| t.str().map(str::to_string))?;
    let factors = with_field(n, "factors", |fs| {
        each(fs, |f| {
            check_keys(f, &["graph", "adhesion"])?;
            let graph = with_field(f, "graph", graph_from_value)?;
            let Some(g) = graph.finite().cloned() else {
                return Err(f.err("factor graphs must be finite"));
            };
            let adhesion = with_field(f, "adhesion", |a| {
                each(a, |e| {
                    check_keys(e, &["label", "vertices"])?;
                    Ok((with_field(e, "label", |l| l.label())?, with_field(e, "vertices", vertex_list)?))
                })
            })?;
            let mut map = BTreeMap::new();
            for (k, s) in adhesion {
                if map.insert(k, s).is_some() {
                    return Err(f.err(format!("adhesion label {k} listed twice")));
                }
            }
            Ok(FactorSpec { graph: g, adhesion: map, action: graph.action })
        })
    })?;
    let factors: [FactorSpec; 2] = factors
        .try_into()
        .map_err(|_| CliError::schema(&format!("{}/factors", n.pointer), "expected exactly two factors"))?;
    let bonding = with_field(n, "bonding", |bs| {
        each(bs, |b| {
            check_keys(b, &["from", "to", "pairs"])?;
            let k = with_field(b, "from", |l| l.label())?;
            let l = with_field(b, "to", |l| l.label())?;
            let pairs = with_field(b, "pairs", |ps| each(ps, |p| pair_of(p, parse_vertex)))?;
            Ok(((k, l), pairs))
        })
    })?;
    let mut bond_map = BTreeMap::new();
    for (kl, pairs) in bonding {
        if bond_map.insert(kl, pairs).is_some() {
            return Err(CliError::schema(&format!("{}/bonding", n.pointer), format!("bonding map {kl:?} listed twice")));
        }
    }
    let type2 = with_opt_field(n, "type2", |t| {
        check_keys(t, &["identify", "j"])?;
        let identify = with_field(t, "identify", |i| each(i, |p| pair_of(p, |x| x.label())))?;
        let j = with_field(t, "j", |j| each(j, |l| l.label()))?;
        Ok(TypeTwo { identify: identify.into_iter().collect(), j: j.into_iter().collect() })
    })?;
    Ok(AmalgamSpec { name, factors, bonding: bond_map, type2 })
}

/// Resolves a `--spec` argument: a catalog name or a path to an amalgam document.
pub fn resolve_spec(arg: &str) -> CliResult<(AmalgamSpec, Option<Vec<u8>>)> {
    if let Ok(spec) = catalog::spec_by_name(arg) {
        return Ok((spec, None));
    }
    let bytes = read_file(arg)?;
    let text = utf8(arg, &bytes)?;
    Ok((parse_amalgam_document(text)?, Some(bytes)))
}

// process scripts

/// A scripted split: the label of the factor to split and the spec to use.
#[derive(Clone, Debug)]
pub struct ScriptStep {
    pub factor: String,
    pub spec: AmalgamSpec,
}

#[derive(Clone, Debug)]
pub struct ProcessScript {
    pub graph: LoadedGraph,
    pub max_steps: usize,
    pub config: ProcessConfig,
    pub steps: Vec<ScriptStep>,
}

pub fn parse_process_script(text: &str) -> CliResult<ProcessScript> {
    let value = parse_json(text)?;
    script_from_value(Node::root(&value))
}

pub fn script_from_value(n: Node<'_>) -> CliResult<ProcessScript> {
    check_keys(n, &["graph", "max_steps", "config", "steps"])?;
    let graph = with_field(n, "graph", |g| match g.value.as_str() {
        Some(name) => LoadedGraph::family(name).map_err(|e| g.err(e.to_string())),
        None => graph_from_value(g),
    })?;
    let max_steps = with_opt_field(n, "max_steps", |m| m.uint())?.unwrap_or(8) as usize;
    let config = with_opt_field(n, "config", |c| {
        check_keys(c, &["iso_radius", "resolution", "budget", "tree_budget"])?;
        let d = ProcessConfig::default();
        let get = |key: &str, default: usize| -> CliResult<usize> {
            Ok(with_opt_field(c, key, |v| v.uint())?.map(|v| v as usize).unwrap_or(default))
        };
        Ok(ProcessConfig {
            iso_radius: get("iso_radius", d.iso_radius)?,
            resolution: get("resolution", d.resolution)?,
            budget: get("budget", d.budget)?,
            tree_budget: get("tree_budget", d.tree_budget)?,
        })
    })?
    .unwrap_or_default();
    let steps = with_field(n, "steps", |s| {
        each(s, |step| {
            check_keys(step, &["factor", "spec"])?;
            Ok(ScriptStep {
                factor: with_field(step, "factor", |f| f.str().map(str::to_string))?,
                spec: with_field(step, "spec", amalgam_from_value)?,
            })
        })
    })?;
    Ok(ProcessScript { graph, max_steps, config, steps })
}

pub fn script_document(s: &ProcessScript) -> CliResult<Value> {
    let steps = s
        .steps
        .iter()
        .map(|st| Ok(json!({ "factor": st.factor, "spec": amalgam_document(&st.spec)? })))
        .collect::<CliResult<Vec<Value>>>()?;
    Ok(json!({
        "graph": graph_document(&s.graph)?,
        "max_steps": s.max_steps,
        "config": {
            "iso_radius": s.config.iso_radius,
            "resolution": s.config.resolution,
            "budget": s.config.budget,
            "tree_budget": s.config.tree_budget,
        },
        "steps": steps,
    }))
}
