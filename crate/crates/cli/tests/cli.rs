use std::process::Command;

use accessibility_cli::{run, Outcome};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("accessibility").chain(args.iter().copied()))
}

fn results(out: &Outcome) -> &Value {
    &out.report.as_ref().expect("a report").results
}

#[test]
fn tight_on_the_line() {
    let out = cli(&["tight", "--graph", "line", "--vertex", "0", "--order", "1", "--radius", "5"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(results(&out)["count"], 2);
    let params = &out.report.as_ref().unwrap().parameters;
    assert_eq!(params["radius"], 5);
    assert_eq!(params["order"], 1);
}

#[test]
fn tight_orbits_on_the_cubic_tree() {
    let out = cli(&["tight", "--graph", "tree(3)", "--vertex", "e", "--order", "1", "--radius", "3", "--budget", "4"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(results(&out)["count"], 6);
    assert_eq!(results(&out)["orbit_representatives"].as_array().unwrap().len(), 2);
}

#[test]
fn one_end_proxy_on_the_grid() {
    let out = cli(&["ends", "--graph", "grid2d", "--radius", "3"]);
    assert_eq!(out.code, 0);
    assert_eq!(results(&out)["proxies"], 1);
    let line = cli(&["ends", "--graph", "line", "--radius", "2"]);
    assert_eq!(results(&line)["proxies"], 2);
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = cli(&["frobnicate"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("Usage"));
    assert!(out.report.is_none());
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn domain_errors_exit_one() {
    let out = cli(&["tight", "--graph", "line", "--vertex", "(1,2)"]);
    assert_eq!(out.code, 1);
    let missing = cli(&["ends", "--graph", "/no/such/file.json"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("cannot read"));
}

#[test]
fn strict_escalates_caveats() {
    let relaxed = cli(&["size-seq", "--tree", "line"]);
    assert_eq!(relaxed.code, 0);
    assert!(!relaxed.report.as_ref().unwrap().warnings.is_empty());
    let strict = cli(&["size-seq", "--tree", "line", "--strict"]);
    assert_eq!(strict.code, 2);
    let clean = cli(&["tight", "--graph", "line", "--strict"]);
    assert_eq!(clean.code, 0);
}

#[test]
fn reports_are_deterministic() {
    let runs = [
        vec!["--json", "amalgamate", "--spec", "square-ladder", "--radius", "2"],
        vec!["--json", "process", "--graph", "line", "--driver", "path3"],
        vec!["--json", "semiring-check", "--graph", "triangle.json", "--samples", "20"],
        vec!["--json", "catalog"],
    ];
    for args in runs {
        let path = data("triangle.json");
        let args: Vec<&str> = args.iter().map(|a| if *a == "triangle.json" { path.as_str() } else { *a }).collect();
        let (a, b) = (cli(&args), cli(&args));
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        assert_eq!(a.stdout, b.stdout);
        let parsed: Value = serde_json::from_str(&a.stdout).unwrap();
        assert_eq!(parsed["command"][0], "--json");
        assert_eq!(parsed["inputs_digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn digest_covers_file_contents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let p = path.to_str().unwrap();
    std::fs::write(&path, r#"{"kind":"finite","vertices":[0,1],"edges":[[0,1]]}"#).unwrap();
    let first = cli(&["ends", "--graph", p]).report.unwrap().inputs_digest;
    std::fs::write(&path, r#"{"kind":"finite","vertices":[0,1,2],"edges":[[0,1]]}"#).unwrap();
    let second = cli(&["ends", "--graph", p]).report.unwrap().inputs_digest;
    assert_ne!(first, second);
}

#[test]
fn amalgamate_writes_ball_dot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.dot");
    let out = cli(&["amalgamate", "--spec", &data("double_ray.json"), "--radius", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let r = results(&out);
    assert_eq!(r["type"], "Type1");
    assert_eq!(r["trivial"], false);
    assert_eq!(r["distinguishes_ends"], true);
    let dot = std::fs::read_to_string(path).unwrap();
    assert!(dot.starts_with("graph \"edge-chain\""));
    assert_eq!(dot.matches(" -- ").count(), 4);
}

#[test]
fn amalgamate_classifies_catalog_specs() {
    for (spec, kind) in [("double-ray-type2", "Type2"), ("twisted-ladder", "Neither"), ("star-path(3)", "Type1")] {
        let out = cli(&["amalgamate", "--spec", spec]);
        assert_eq!(results(&out)["type"], kind, "{spec}");
    }
}

#[test]
fn decompose_sweep_and_single() {
    let out = cli(&["decompose", "--graph", &data("triangle.json"), "--order", "2"]);
    assert_eq!(out.code, 0);
    assert_eq!(results(&out)["separations"], 14);
    assert_eq!(results(&out)["round_trip_failures"], 0);

    let dir = tempfile::tempdir().unwrap();
    let sep = dir.path().join("sep.json");
    std::fs::write(&sep, r#"{"separator":[0,1],"sides":[{"seed":-1,"side":"A"},{"seed":2,"side":"B"}]}"#).unwrap();
    let dot = dir.path().join("expr.dot");
    let out = cli(&["decompose", "--graph", "line", "--separation", sep.to_str().unwrap(), "--out", dot.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(results(&out)["round_trip"], true);
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph expression"));
}

#[test]
fn td_validate_good_and_bad() {
    let good = cli(&["td-validate", "--td", &data("p3_td.json")]);
    assert_eq!(good.code, 0);
    assert_eq!(results(&good)["valid"], true);
    assert_eq!(results(&good)["max_adhesion"], 1);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"graph":{"kind":"finite","vertices":[0,1,2],"edges":[[0,1],[1,2]]},
            "tree":{"nodes":[0,1],"edges":[[0,1]]},
            "parts":[{"node":0,"vertices":[0,1]},{"node":1,"vertices":[2]}]}"#,
    )
    .unwrap();
    let out = cli(&["td-validate", "--td", bad.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert_eq!(results(&out)["valid"], false);

    let lazy = cli(&["td-validate", "--spec", "square-ladder", "--radius", "2"]);
    assert_eq!(results(&lazy)["valid"], true);
    assert_eq!(results(&lazy)["invariant"], true);
}

#[test]
fn size_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    std::fs::write(&path, r#"{"kind":"line","generators":["shift"]}"#).unwrap();
    let out = cli(&["size-seq", "--tree", path.to_str().unwrap()]);
    assert_eq!(results(&out)["size"], "(0,[1])");
    let spec = cli(&["size-seq", "--spec", "double-ray"]);
    assert_eq!(results(&spec)["size"], "(0,[0,1])");
    assert_eq!(cli(&["size-seq", "--tree", "grid2d"]).code, 1);
}

#[test]
fn compress_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p4.json");
    std::fs::write(
        &path,
        r#"{"kind":"finite","name":"P4","vertices":[0,1,2,3],"edges":[[0,1],[1,2],[2,3]],
            "generators":[{"name":"flip","map":[[0,3],[3,0],[1,2],[2,1]]}]}"#,
    )
    .unwrap();
    let out = cli(&["compress", "--tree", path.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(results(&out)["incompressible"], true);
    assert!(!results(&out)["contracted"].as_array().unwrap().is_empty());
}

#[test]
fn process_script_replays_steps() {
    let out = cli(&["process", "--script", &data("line_script.json")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let r = results(&out);
    assert_eq!(r["outcome"], "terminated");
    assert_eq!(r["steps"], 1);
    assert_eq!(r["rejections"][0]["spec"], "path-square");
    assert_eq!(r["sizes"], serde_json::json!(["(-1,[])", "(0,[0,1])"]));
}

#[test]
fn process_with_shipped_drivers() {
    let grid = cli(&["process", "--graph", "grid2d", "--driver", "none"]);
    assert_eq!(results(&grid)["outcome"], "terminated");
    assert_eq!(results(&grid)["steps"], 0);
    let unknown = cli(&["process", "--graph", "line", "--driver", "nope"]);
    assert_eq!(unknown.code, 1);
    assert!(unknown.stderr.contains("double-ray"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_accessibility");
    let ok = Command::new(bin).args(["ends", "--graph", "grid2d", "--radius", "3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("1 end proxy"));
    let bad = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let strict = Command::new(bin).args(["size-seq", "--tree", "line", "--strict"]).output().unwrap();
    assert_eq!(strict.status.code(), Some(2));
}
