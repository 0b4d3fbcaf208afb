//! The `accessibility` command line: argument parsing and dispatch.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::PathBuf;

use accessibility_core::amalgam::{
    amalgam_distinguishes_ends, classify_type, connecting_tree, construct_amalgam, corresponding_td, is_trivial,
    lifted_action, AmalgamSpec,
};
use accessibility_core::catalog;
use accessibility_core::explore::ball_around;
use accessibility_core::families;
use accessibility_core::group::GroupAction;
use accessibility_core::process::{
    run_process, shipped_drivers, size_trace_report, Driver, Factor, ProcessConfig, ProcessOutcome, ProcessState,
};
use accessibility_core::separation::{
    decompose_into_tight, end_proxies, enumerate_tight, quotient, Separation, SeparationExpression, Side,
};
use accessibility_core::tree_decomp::{
    adhesion_sets, compressible_edges, contract_compressible, is_incompressible, is_invariant, size_sequence,
    validate_td, TreeHandle,
};
use accessibility_core::{Error as CoreError, GraphHandle, VertexId};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::document::{
    expression_document, parse_td_document, parse_vertex_arg, read_file, resolve_graph, resolve_spec,
    separation_document, separation_from_value, utf8, vertex_json, GraphSource, LoadedGraph, Node,
    parse_json, parse_process_script, ScriptStep,
};
use crate::dot::{ball_dot, expression_dot, td_dot};
use crate::error::{CliError, CliResult};
use crate::report::{inputs_digest, RunReport};

#[derive(Debug, Parser)]
#[command(name = "accessibility", version, about = "Separations, tree-decompositions and tree amalgamations of graphs")]
pub struct Cli {
    /// Print the full JSON report instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Treat budget and resolution caveats as failures (exit code 2).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Write the DOT rendering (or the JSON report when there is none) to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tight separations of bounded order containing a vertex.
    Tight(TightArgs),
    /// Express a separation through tight ones and evaluate it back.
    Decompose(DecomposeArgs),
    /// Check the semiring laws on random separations of a finite graph.
    SemiringCheck(SemiringArgs),
    /// Build a tree amalgamation and report on it.
    Amalgamate(AmalgamateArgs),
    /// Validate a tree-decomposition.
    TdValidate(TdArgs),
    /// Size sequence of a tree under its action.
    SizeSeq(SizeSeqArgs),
    /// Contract the compressible edges of a finite tree.
    Compress(CompressArgs),
    /// Run the splitting process from a script or a shipped driver.
    Process(ProcessArgs),
    /// End proxies at a given radius.
    Ends(EndsArgs),
    /// List built-in families, amalgamation specs and drivers.
    Catalog,
}

/// `--graph` accepts a family name (line, grid2d, ladder, tree(d)), `spec:NAME`
/// for a catalog amalgam, or a path to a graph document.
#[derive(Debug, Args)]
pub struct TightArgs {
    #[arg(long)]
    pub graph: String,
    /// Defaults to the graph's root vertex.
    #[arg(long)]
    pub vertex: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
    /// Also quotient by the declared action with words up to this length.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub graph: String,
    /// Separation document; without it every separation of order at most
    /// `--order` of a small finite graph is decomposed.
    #[arg(long)]
    pub separation: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct SemiringArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct AmalgamateArgs {
    /// Catalog name or path to an amalgamation document.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
    #[arg(long, default_value_t = 6)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct TdArgs {
    /// Tree-decomposition document.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub td: Option<String>,
    /// Use the decomposition of this amalgam along its connecting tree.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
}

#[derive(Debug, Args)]
pub struct SizeSeqArgs {
    /// A tree: `line`, `tree(d)` or a finite graph document.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub tree: Option<String>,
    /// Use the connecting tree of this amalgam with the lifted action.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[arg(long)]
    pub tree: String,
    #[arg(long, default_value_t = 4)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Process script document.
    #[arg(long, conflicts_with_all = ["graph", "driver"], required_unless_present = "graph")]
    pub script: Option<String>,
    #[arg(long, requires = "driver")]
    pub graph: Option<String>,
    /// Name of a shipped driver for the graph's family.
    #[arg(long)]
    pub driver: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub max_steps: usize,
    /// Word budget for respect checks.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Resolution for end checks.
    #[arg(long)]
    pub radius: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EndsArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, default_value_t = 3)]
    pub radius: usize,
}

/// What a run printed and how it exited.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<RunReport>,
}

#[derive(Default)]
struct Context {
    files: Vec<Vec<u8>>,
    parameters: BTreeMap<String, Value>,
    warnings: Vec<String>,
    text: String,
    dot: Option<String>,
    failure: Option<String>,
}

impl Context {
    fn input(&mut self, bytes: Option<Vec<u8>>) {
        self.files.extend(bytes);
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, stderr: String::new(), report: None }
                }
                _ => Outcome { code: 1, stdout: String::new(), stderr: text, report: None },
            };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    execute(&cli, args)
}

fn execute(cli: &Cli, args: Vec<String>) -> Outcome {
    let mut ctx = Context::default();
    let result = match &cli.command {
        Command::Tight(a) => tight(&mut ctx, a),
        Command::Decompose(a) => decompose(&mut ctx, a),
        Command::SemiringCheck(a) => semiring_check(&mut ctx, a),
        Command::Amalgamate(a) => amalgamate(&mut ctx, a),
        Command::TdValidate(a) => td_validate(&mut ctx, a),
        Command::SizeSeq(a) => size_seq(&mut ctx, a),
        Command::Compress(a) => compress(&mut ctx, a),
        Command::Process(a) => process(&mut ctx, a),
        Command::Ends(a) => ends(&mut ctx, a),
        Command::Catalog => catalog_listing(&mut ctx),
    };
    let results = match result {
        Ok(v) => v,
        Err(e) => {
            let code = if cli.strict && e.is_caveat() { 2 } else { 1 };
            return Outcome { code, stdout: String::new(), stderr: format!("error: {e}\n"), report: None };
        }
    };
    let report = RunReport {
        inputs_digest: inputs_digest(&args, &ctx.files),
        command: args,
        parameters: ctx.parameters,
        results,
        warnings: ctx.warnings,
    };
    let mut stderr = String::new();
    if let Some(path) = &cli.out {
        let body = ctx.dot.clone().unwrap_or_else(|| report.to_json());
        if let Err(e) = std::fs::write(path, body) {
            let err = CliError::Io { path: path.clone(), source: e };
            return Outcome { code: 1, stdout: String::new(), stderr: format!("error: {err}\n"), report: Some(report) };
        }
    }
    let mut stdout = if cli.json { report.to_json() } else { ctx.text };
    if !cli.json {
        for w in &report.warnings {
            let _ = writeln!(stdout, "warning: {w}");
        }
    }
    let code = if let Some(f) = ctx.failure {
        let _ = writeln!(stderr, "error: {f}");
        1
    } else if cli.strict && !report.warnings.is_empty() {
        let _ = writeln!(stderr, "error: {} caveat(s) under --strict", report.warnings.len());
        2
    } else {
        0
    };
    Outcome { code, stdout, stderr, report: Some(report) }
}

fn load_graph(ctx: &mut Context, arg: &str) -> CliResult<LoadedGraph> {
    let (g, bytes) = resolve_graph(arg)?;
    ctx.input(bytes);
    ctx.param("graph", arg);
    Ok(g)
}

fn load_spec(ctx: &mut Context, arg: &str) -> CliResult<AmalgamSpec> {
    let (spec, bytes) = resolve_spec(arg)?;
    ctx.input(bytes);
    ctx.param("spec", arg);
    Ok(spec)
}

fn seps_json(xs: &[Separation]) -> Value {
    Value::Array(xs.iter().map(separation_document).collect())
}

fn tight(ctx: &mut Context, a: &TightArgs) -> CliResult<Value> {
    let g = load_graph(ctx, &a.graph)?;
    let v = match &a.vertex {
        Some(s) => parse_vertex_arg(s)?,
        None => g.graph.root(),
    };
    ctx.param("vertex", v.to_string());
    ctx.param("order", a.order);
    ctx.param("radius", a.radius);
    let seps = enumerate_tight(&g.graph, &v, a.order, a.radius)?;
    ctx.line(format!(
        "{} tight separation(s) of order at most {} containing {v} (separators inside the radius-{} ball)",
        seps.len(),
        a.order,
        a.radius
    ));
    for x in &seps {
        ctx.line(format!("  {x}"));
    }
    let mut results = json!({ "count": seps.len(), "separations": seps_json(&seps) });
    if let Some(budget) = a.budget {
        ctx.param("budget", budget);
        let reps = quotient(&g.action.clone().with_budget(budget), seps)?;
        ctx.line(format!("{} orbit representative(s) under words of length at most {budget}", reps.len()));
        results["orbit_representatives"] = seps_json(&reps);
    }
    Ok(results)
}

#[derive(Default)]
struct LeafCounts {
    tight: usize,
    neutral: usize,
    other: usize,
}

impl LeafCounts {
    fn add(&mut self, e: &SeparationExpression) {
        for x in e.leaves() {
            if x.is_tight() {
                self.tight += 1;
            } else if x.is_neutral() {
                self.neutral += 1;
            } else {
                self.other += 1;
            }
        }
    }
}

fn decompose(ctx: &mut Context, a: &DecomposeArgs) -> CliResult<Value> {
    let g = load_graph(ctx, &a.graph)?;
    if let Some(path) = &a.separation {
        ctx.param("separation", path.as_str());
        let bytes = read_file(path)?;
        let value = parse_json(utf8(path, &bytes)?)?;
        ctx.input(Some(bytes));
        let x = separation_from_value(Node::root(&value), &g.graph)?;
        let e = decompose_into_tight(&x)?;
        let back = e.evaluate()?;
        let mut counts = LeafCounts::default();
        counts.add(&e);
        ctx.line(format!("{x}"));
        ctx.line(format!("  = {e}"));
        ctx.line(format!(
            "leaves: {} tight, {} neutral, {} other; round trip {}",
            counts.tight,
            counts.neutral,
            counts.other,
            if back == x { "ok" } else { "FAILED" }
        ));
        if back != x {
            ctx.failure = Some(format!("expression evaluates to {back}, not {x}"));
        }
        ctx.dot = Some(expression_dot(&e));
        return Ok(json!({
            "separation": separation_document(&x),
            "expression": expression_document(&e),
            "round_trip": back == x,
            "leaves": { "tight": counts.tight, "neutral": counts.neutral, "other": counts.other },
        }));
    }
    ctx.param("order", a.order);
    let seps = all_separations(&g, a.order)?;
    let mut counts = LeafCounts::default();
    let mut failures = 0;
    for x in &seps {
        let e = decompose_into_tight(x)?;
        if e.evaluate()? != *x {
            failures += 1;
        }
        counts.add(&e);
    }
    ctx.line(format!("{} separation(s) of order at most {}; {failures} round-trip failure(s)", seps.len(), a.order));
    ctx.line(format!("leaves: {} tight, {} neutral, {} other", counts.tight, counts.neutral, counts.other));
    if failures > 0 {
        ctx.failure = Some(format!("{failures} expression(s) did not evaluate back"));
    }
    Ok(json!({
        "separations": seps.len(),
        "round_trip_failures": failures,
        "leaves": { "tight": counts.tight, "neutral": counts.neutral, "other": counts.other },
    }))
}

const SWEEP_LIMIT: usize = 12;
const COMPONENT_LIMIT: usize = 16;

/// Every separation of order at most `order` of a small finite graph.
fn all_separations(g: &LoadedGraph, order: usize) -> CliResult<Vec<Separation>> {
    let Some(f) = g.finite() else {
        return Err(CliError::Validation("sweeping all separations needs a finite graph".into()));
    };
    let vs = f.vertex_list();
    if vs.len() > SWEEP_LIMIT {
        return Err(CliError::Validation(format!(
            "{} has {} vertices; sweeps stop at {SWEEP_LIMIT}, pass --separation instead",
            f.name(),
            vs.len()
        )));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << vs.len()) {
        if mask.count_ones() as usize > order {
            continue;
        }
        let s: BTreeSet<VertexId> = (0..vs.len()).filter(|i| mask >> i & 1 == 1).map(|i| vs[i].clone()).collect();
        let probe = Separation::with_sides(&g.graph, &s, |_| Ok(Side::A))?;
        let c = probe.a_side().len();
        if c > COMPONENT_LIMIT {
            return Err(CliError::Validation(format!("too many components after removing {} vertices", s.len())));
        }
        for sides in 0u32..(1 << c) {
            let mut i = 0;
            out.push(Separation::with_sides(&g.graph, &s, |_| {
                let side = if sides >> i & 1 == 1 { Side::B } else { Side::A };
                i += 1;
                Ok(side)
            })?);
        }
    }
    Ok(out)
}

fn random_separation(rng: &mut ChaCha8Rng, g: &GraphHandle, vs: &[VertexId], order: usize) -> CliResult<Separation> {
    let k = rng.gen_range(0..=order.min(vs.len()));
    let mut s = BTreeSet::new();
    while s.len() < k {
        s.insert(vs[rng.gen_range(0..vs.len())].clone());
    }
    Ok(Separation::with_sides(g, &s, |_| Ok(if rng.gen_bool(0.5) { Side::A } else { Side::B }))?)
}

fn semiring_check(ctx: &mut Context, a: &SemiringArgs) -> CliResult<Value> {
    let g = load_graph(ctx, &a.graph)?;
    let Some(f) = g.finite() else {
        return Err(CliError::Validation("semiring-check needs a finite graph".into()));
    };
    ctx.param("samples", a.samples);
    ctx.param("seed", a.seed);
    ctx.param("order", a.order);
    let vs = f.vertex_list().to_vec();
    let (zero, one) = (Separation::all_a(&g.graph), Separation::all_b(&g.graph));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    for _ in 0..a.samples {
        let x = random_separation(&mut rng, &g.graph, &vs, a.order)?;
        let y = random_separation(&mut rng, &g.graph, &vs, a.order)?;
        let z = random_separation(&mut rng, &g.graph, &vs, a.order)?;
        let laws = [
            ("plus associative", x.plus(&y)?.plus(&z)? == x.plus(&y.plus(&z)?)?),
            ("times associative", x.times(&y)?.times(&z)? == x.times(&y.times(&z)?)?),
            ("plus commutative", x.plus(&y)? == y.plus(&x)?),
            ("times commutative", x.times(&y)? == y.times(&x)?),
            ("distributive", x.times(&y.plus(&z)?)? == x.times(&y)?.plus(&x.times(&z)?)?),
            ("plus idempotent", x.plus(&x)? == x),
            ("times idempotent", x.times(&x)? == x),
            ("absorption", x.plus(&x.times(&y)?)? == x),
            ("zero", x.plus(&zero)? == x),
            ("one", x.times(&one)? == x),
        ];
        for (name, ok) in laws {
            *failures.entry(name).or_default() += usize::from(!ok);
        }
    }
    let total: usize = failures.values().sum();
    ctx.line(format!("{} random triple(s) on {}: {total} law violation(s)", a.samples, f.name()));
    for (name, n) in &failures {
        if *n > 0 {
            ctx.line(format!("  {name}: {n}"));
        }
    }
    if total > 0 {
        ctx.failure = Some(format!("{total} semiring law violation(s)"));
    }
    Ok(json!({ "triples": a.samples, "violations": failures, "total_violations": total }))
}

fn amalgamate(ctx: &mut Context, a: &AmalgamateArgs) -> CliResult<Value> {
    let spec = load_spec(ctx, &a.spec)?;
    ctx.param("radius", a.radius);
    ctx.param("budget", a.budget);
    let am = construct_amalgam(&spec)?;
    let ball = ball_around(am.graph.as_ref(), &am.graph.root(), a.radius)?;
    let trivial = is_trivial(&am)?;
    let report = classify_type(&am, a.budget);
    let identification = match am.max_identification() {
        Ok(n) => json!(n),
        Err(e @ CoreError::Budget(_)) => {
            ctx.warnings.push(format!("identification classes: {e}"));
            Value::Null
        }
        Err(e) => return Err(e.into()),
    };
    let distinguishes = amalgam_distinguishes_ends(&am, a.radius)?;
    let lifted = lifted_action(&am)?;
    for d in &lifted.dropped {
        ctx.warnings.push(format!("lifted generator {d} did not extend and was dropped"));
    }
    ctx.line(format!("{}: adhesion {}, tree {}", spec.name, am.adhesion(), if am.tree_is_infinite() { "infinite" } else { "finite" }));
    ctx.line(format!("ball of radius {}: {} vertices, {} edges", a.radius, ball.len(), ball.edges.len()));
    ctx.line(format!("trivial: {trivial}"));
    ctx.line(format!("type: {} (words up to length {})", report.kind, report.budget));
    ctx.line(format!("largest identification class: {identification}"));
    ctx.line(format!("distinguishes ends at radius {}: {distinguishes}", a.radius));
    ctx.dot = Some(ball_dot(&ball, &spec.name));
    let respects: Vec<Value> = report
        .respects
        .iter()
        .map(|r| json!({ "side": r.side + 1, "word": r.word, "respects": r.witness.is_some() }))
        .collect();
    Ok(json!({
        "name": spec.name,
        "adhesion": am.adhesion(),
        "tree_infinite": am.tree_is_infinite(),
        "ball": {
            "radius": a.radius,
            "vertices": ball.vertices.iter().map(vertex_json).collect::<Vec<_>>(),
            "edges": ball.edges.iter().map(|(u, v)| json!([vertex_json(u), vertex_json(v)])).collect::<Vec<_>>(),
        },
        "trivial": trivial,
        "type": report.kind.to_string(),
        "respects": respects,
        "type1_failures": report.type1_failures,
        "type2_failures": report.type2_failures,
        "max_identification": identification,
        "distinguishes_ends": distinguishes,
        "lifted_generators": lifted.graph_action.generators.iter().map(|g| g.tag().to_string()).collect::<Vec<_>>(),
    }))
}

fn td_validate(ctx: &mut Context, a: &TdArgs) -> CliResult<Value> {
    ctx.param("radius", a.radius);
    let (td, action) = match (&a.td, &a.spec) {
        (Some(path), _) => {
            ctx.param("td", path.as_str());
            let bytes = read_file(path)?;
            let loaded = parse_td_document(utf8(path, &bytes)?)?;
            ctx.input(Some(bytes));
            (loaded.td, loaded.graph.action)
        }
        (None, Some(spec)) => {
            let spec = load_spec(ctx, spec)?;
            let am = construct_amalgam(&spec)?;
            let lifted = lifted_action(&am)?;
            (corresponding_td(&am)?, lifted.graph_action)
        }
        (None, None) => return Err(CliError::Usage("td-validate needs --td or --spec".into())),
    };
    let violation = validate_td(&td, a.radius)?;
    let adhesion = adhesion_sets(&td, a.radius)?;
    let invariance = is_invariant(&td, &action, a.radius)?;
    match &violation {
        None => ctx.line("valid tree-decomposition"),
        Some(v) => ctx.line(format!("invalid: {v}")),
    }
    ctx.line(format!("largest adhesion set: {}", adhesion.max));
    match &invariance.witness {
        None => ctx.line(format!("invariant under {} generator(s)", action.generators.len())),
        Some(w) => ctx.line(format!("not invariant: {w}")),
    }
    if !td.is_finite() {
        ctx.warnings.push(format!("checked on the radius-{} window only", a.radius));
    }
    if let Some(v) = &violation {
        ctx.failure = Some(v.to_string());
    }
    ctx.dot = Some(td_dot(&td, a.radius)?);
    Ok(json!({
        "valid": violation.is_none(),
        "violation": violation.map(|v| v.to_string()),
        "max_adhesion": adhesion.max,
        "finite_adhesion": adhesion.finite_adhesion,
        "invariant": invariance.invariant,
        "invariance_witness": invariance.witness,
    }))
}

/// A tree with its action: a finite tree document, `line`, `tree(d)`, or an amalgam's connecting tree.
fn load_tree(ctx: &mut Context, tree: Option<&str>, spec: Option<&str>, budget: usize) -> CliResult<(TreeHandle, GroupAction)> {
    ctx.param("budget", budget);
    if let Some(spec) = spec {
        let spec = load_spec(ctx, spec)?;
        let am = construct_amalgam(&spec)?;
        let lifted = lifted_action(&am)?;
        for d in &lifted.dropped {
            ctx.warnings.push(format!("lifted generator {d} did not extend and was dropped"));
        }
        return Ok((connecting_tree(&am)?, lifted.tree_action.with_budget(budget)));
    }
    let arg = tree.ok_or_else(|| CliError::Usage("pass --tree or --spec".into()))?;
    let g = load_graph(ctx, arg)?;
    let handle = match &g.source {
        GraphSource::Finite(f) => TreeHandle::finite(f.clone())?,
        GraphSource::Family(name) if name == "line" || name.starts_with("tree(") => {
            TreeHandle::lazy(g.graph.clone(), vec![g.graph.root()])?
        }
        _ => return Err(CliError::Validation(format!("{arg} is not a tree"))),
    };
    Ok((handle, g.action.with_budget(budget)))
}

fn size_seq(ctx: &mut Context, a: &SizeSeqArgs) -> CliResult<Value> {
    let (tree, action) = load_tree(ctx, a.tree.as_deref(), a.spec.as_deref(), a.budget)?;
    let s = size_sequence(&tree, &action)?;
    let compressible = compressible_edges(&tree, &action)?;
    if !s.exact {
        ctx.warnings.push(format!("stabilizer orders from words of length at most {}", a.budget));
    }
    ctx.line(format!("size sequence {s}"));
    ctx.line(format!("{} edge orbit(s), {} compressible edge(s)", s.edge_orbits(), compressible.len()));
    Ok(json!({
        "size": s.to_string(),
        "head": s.head,
        "tail": s.tail,
        "exact": s.exact,
        "edge_orbits": s.edge_orbits(),
        "compressible_edges": compressible.iter().map(|(u, v)| json!([vertex_json(u), vertex_json(v)])).collect::<Vec<_>>(),
    }))
}

fn compress(ctx: &mut Context, a: &CompressArgs) -> CliResult<Value> {
    let (tree, action) = load_tree(ctx, Some(&a.tree), None, a.budget)?;
    let before = size_sequence(&tree, &action)?;
    let cr = contract_compressible(&tree, &action)?;
    let after = size_sequence(&cr.tree, &cr.action)?;
    let incompressible = is_incompressible(&cr.tree, &cr.action)?;
    if !before.exact || !after.exact {
        ctx.warnings.push(format!("stabilizer orders from words of length at most {}", a.budget));
    }
    let nodes = cr.tree.explored_nodes()?;
    let edges = cr.tree.explored_edges()?;
    ctx.line(format!("contracted {} edge orbit(s)", cr.log.len()));
    ctx.line(format!("{} node(s), {} edge(s) remain; size {before} -> {after}", nodes.len(), edges.len()));
    let classes = cr.classes.as_ref().map(|c| {
        c.iter().map(|(t, k)| json!([vertex_json(t), vertex_json(k)])).collect::<Vec<_>>()
    });
    Ok(json!({
        "contracted": cr.log.iter().map(|orbit| orbit.iter().map(|(u, v)| json!([vertex_json(u), vertex_json(v)])).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "nodes": nodes.iter().map(vertex_json).collect::<Vec<_>>(),
        "edges": edges.iter().map(|(u, v)| json!([vertex_json(u), vertex_json(v)])).collect::<Vec<_>>(),
        "classes": classes,
        "size_before": before.to_string(),
        "size_after": after.to_string(),
        "incompressible": incompressible,
    }))
}

/// Replays scripted splits in order, each proposed once.
struct ScriptDriver {
    steps: Vec<ScriptStep>,
    next: usize,
}

impl Driver for ScriptDriver {
    fn name(&self) -> &str {
        "script"
    }

    fn choose(&mut self, st: &ProcessState) -> Option<(usize, AmalgamSpec)> {
        let step = self.steps.get(self.next)?;
        self.next += 1;
        let factors = &st.factorisation.factors;
        let index = factors.iter().position(|f| f.label == step.factor).unwrap_or(factors.len());
        Some((index, step.spec.clone()))
    }
}

fn process(ctx: &mut Context, a: &ProcessArgs) -> CliResult<Value> {
    let (graph, mut driver, max_steps, mut config): (LoadedGraph, Box<dyn Driver>, usize, ProcessConfig) =
        match (&a.script, &a.graph, &a.driver) {
            (Some(path), _, _) => {
                ctx.param("script", path.as_str());
                let bytes = read_file(path)?;
                let script = parse_process_script(utf8(path, &bytes)?)?;
                ctx.input(Some(bytes));
                let driver = ScriptDriver { steps: script.steps, next: 0 };
                (script.graph, Box::new(driver), script.max_steps, script.config)
            }
            (None, Some(g), Some(name)) => {
                let graph = load_graph(ctx, g)?;
                ctx.param("driver", name.as_str());
                let drivers = shipped_drivers(&graph.label());
                let known: Vec<String> = drivers.iter().map(|d| d.name.clone()).collect();
                let driver = drivers.into_iter().find(|d| d.name == *name).ok_or_else(|| {
                    CliError::Validation(format!("no driver {name:?} for {}; shipped: {}", graph.label(), known.join(", ")))
                })?;
                (graph, Box::new(driver), a.max_steps, ProcessConfig::default())
            }
            _ => return Err(CliError::Usage("process needs --script, or --graph with --driver".into())),
        };
    if let Some(b) = a.budget {
        config.budget = b;
    }
    if let Some(r) = a.radius {
        config.resolution = r;
    }
    ctx.param("max_steps", max_steps);
    ctx.param(
        "config",
        json!({
            "iso_radius": config.iso_radius,
            "resolution": config.resolution,
            "budget": config.budget,
            "tree_budget": config.tree_budget,
        }),
    );
    let initial = Factor::new(graph.label(), graph.graph.clone(), graph.action.clone());
    let outcome = run_process(initial, driver.as_mut(), max_steps, config)?;
    let st = outcome.state();
    let kind = match &outcome {
        ProcessOutcome::Terminated { .. } => "terminated",
        ProcessOutcome::BudgetExceeded(_) => {
            ctx.warnings.push(format!("no termination within {max_steps} step(s)"));
            "budget-exceeded"
        }
        ProcessOutcome::Stalled(_) => "stalled",
    };
    let trace = size_trace_report(st);
    for c in trace.iter().filter(|c| c.anomaly) {
        ctx.warnings.push(format!("size did not grow: {} -> {}", c.from, c.to));
    }
    if st.sizes.iter().any(|s| !s.exact) {
        ctx.warnings.push(format!("stabilizer orders from words of length at most {}", config.tree_budget));
    }
    ctx.line(format!("{kind} after {} step(s) with driver {}", st.steps, driver.name()));
    ctx.line(format!("factors: {}", st.factorisation.labels().join(", ")));
    for r in &st.factorisation.structure {
        ctx.line(format!("  step {}: {} split by {} ({}) into {} and {}", r.step, r.factor, r.spec, r.kind, r.children[0], r.children[1]));
    }
    for r in &st.rejections {
        ctx.line(format!("  rejected at step {}: {} on factor {}: {}", r.step, r.spec, r.factor, r.reason));
    }
    let sizes: Vec<String> = st.sizes.iter().map(|s| s.to_string()).collect();
    ctx.line(format!("sizes: {}", sizes.join(" < ")));
    Ok(json!({
        "outcome": kind,
        "driver": driver.name(),
        "steps": st.steps,
        "factors": st.factorisation.labels(),
        "structure": st.factorisation.structure.iter().map(|r| json!({
            "step": r.step,
            "factor": r.factor,
            "spec": r.spec,
            "type": r.kind.to_string(),
            "children": r.children,
        })).collect::<Vec<_>>(),
        "rejections": st.rejections.iter().map(|r| json!({
            "step": r.step,
            "factor": r.factor,
            "spec": r.spec,
            "reason": r.reason.to_string(),
        })).collect::<Vec<_>>(),
        "sizes": sizes,
        "size_trace": trace.iter().map(|c| json!({
            "from": c.from.to_string(),
            "to": c.to.to_string(),
            "anomaly": c.anomaly,
        })).collect::<Vec<_>>(),
    }))
}

fn ends(ctx: &mut Context, a: &EndsArgs) -> CliResult<Value> {
    let g = load_graph(ctx, &a.graph)?;
    ctx.param("radius", a.radius);
    let report = end_proxies(&g.graph, a.radius)?;
    ctx.warnings.extend(report.warnings.iter().cloned());
    let seeds: Vec<&VertexId> = report.proxies.iter().map(|p| &p.component.seed).collect();
    ctx.line(format!("{} end prox{} at radius {}", seeds.len(), if seeds.len() == 1 { "y" } else { "ies" }, a.radius));
    for s in &seeds {
        ctx.line(format!("  component seeded at {s}"));
    }
    let ball = ball_around(g.graph.as_ref(), &g.graph.root(), a.radius)?;
    ctx.dot = Some(ball_dot(&ball, &g.graph.name()));
    Ok(json!({ "proxies": seeds.len(), "seeds": seeds.into_iter().map(vertex_json).collect::<Vec<_>>() }))
}

fn catalog_listing(ctx: &mut Context) -> CliResult<Value> {
    let fams = families::names();
    ctx.line(format!("families: {}", fams.join(", ")));
    let specs = catalog::specs();
    ctx.line("amalgamation specs:");
    let mut spec_rows = Vec::new();
    for s in &specs {
        let sizes = [s.factors[0].graph.len(), s.factors[1].graph.len()];
        ctx.line(format!("  {} ({} + {} vertices{})", s.name, sizes[0], sizes[1], if s.type2.is_some() { ", with J" } else { "" }));
        spec_rows.push(json!({
            "name": s.name,
            "factor_sizes": sizes,
            "labels": [s.labels(0), s.labels(1)],
            "type2": s.type2.is_some(),
        }));
    }
    let mut drivers = serde_json::Map::new();
    ctx.line("drivers:");
    for f in &fams {
        let names: Vec<String> = shipped_drivers(f).into_iter().map(|d| d.name).collect();
        ctx.line(format!("  {f}: {}", names.join(", ")));
        drivers.insert(f.clone(), json!(names));
    }
    Ok(json!({ "families": fams, "specs": spec_rows, "drivers": drivers }))
}
