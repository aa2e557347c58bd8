use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SEGRE: &str = r#"{"field":"Q","factors":[{"dim":2,"degree":1},{"dim":2,"degree":1},{"dim":2,"degree":1}],
 "polynomial":"a1*b1*c1 + a1*b2*c2 + a2*b1*c2 + a2*b2*c1"}"#;
const CUBIC: &str = r#"{"field":"Q","factors":[{"dim":6,"degree":3}],
 "polynomial":"x1*x4*x6 - 2*x2*x1*x4 - x1^2*x5 + 3*x3*x1^2 + 3*x2^2*x1"}"#;
const SHIFT: &str = r#"{"field":"Q","matrices":[[["0","1","0","0","0","0"],["0","0","1","0","0","0"],
 ["0","0","0","0","0","0"],["0","0","0","0","1","0"],["0","0","0","0","0","0"],["0","0","0","0","0","0"]]]}"#;
const FERMAT: &str = r#"{"field":"Q","factors":[{"dim":2,"degree":3}],"polynomial":"x1^3 + x2^3"}"#;
const X2Y: &str = r#"{"field":"Q","factors":[{"dim":2,"degree":3}],"polynomial":"x1^2*x2"}"#;
const IRRATIONAL: &str = r#"{"field":"Q","factors":[{"dim":2,"degree":3}],"polynomial":"x1^3 + 6*x1*x2^2"}"#;
const GENERIC: &str = concat!(
    r#"{"field":"Q","factors":[{"dim":3,"degree":1},{"dim":3,"degree":1},{"dim":3,"degree":1}],"#,
    r#""polynomial":"a1*b1*c1 - a1*b1*c2 + 2*a1*b1*c3 - a1*b2*c1 + 3*a1*b2*c2 + 2*a1*b2*c3 + 3*a1*b3*c1"#,
    r#" + 2*a1*b3*c2 + 2*a1*b3*c3 + a2*b1*c1 - 3*a2*b1*c2 + 3*a2*b1*c3 + 3*a2*b2*c2 - 2*a2*b2*c3 + 2*a2*b3*c1"#,
    r#" - 3*a2*b3*c2 - 2*a2*b3*c3 - 3*a3*b1*c1 - a3*b1*c2 + 3*a3*b2*c1 - 2*a3*b2*c2 + a3*b3*c1 - 3*a3*b3*c2"#,
    r#" + a3*b3*c3"}"#
);

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Workspace {
        Workspace { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, content: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, content).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn svtensor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svtensor")).args(args).output().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Run with `--json` and return the artifact.
fn artifact(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = svtensor(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn segre_centroid_has_dimension_two() {
    let ws = Workspace::new();
    let t = ws.file("t.json", SEGRE);
    let a = artifact(&["centroid", arg(&t)]);
    assert_eq!(a["kind"], "centroid");
    assert_eq!(a["result"]["dimension"], 2);
    let swap = &a["result"]["basis"][1]["matrices"][0];
    assert_eq!(swap, &serde_json::json!([["0", "1"], ["1", "0"]]));
}

#[test]
fn fermat_splits_into_two_cubes() {
    let ws = Workspace::new();
    let t = ws.file("t.json", FERMAT);
    let a = artifact(&["split", arg(&t)]);
    assert_eq!(a["result"]["verdict"]["verdict"], "direct_sum");
    let summands = a["result"]["summands"].as_array().unwrap();
    assert_eq!(summands.len(), 2);
    let out = svtensor(&["split", arg(&t)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("summand 1: x1^3") && text.contains("summand 2: x2^3"), "{text}");
}

#[test]
fn worked_cubic_degenerates_to_three_summands() {
    let ws = Workspace::new();
    let t = ws.file("t.json", CUBIC);
    let e = ws.file("e.json", SHIFT);
    let a = artifact(&["degenerate", arg(&t), "--element", arg(&e), "--omega", "1,0,-1", "--evaluate", "1"]);
    assert_eq!(a["result"]["limit"]["passed"], true);
    assert_eq!(a["result"]["limit"]["expected_valuation"], 2);
    assert_eq!(a["result"]["witness"]["summands"].as_array().unwrap().len(), 3);
    assert_eq!(a["result"]["witness"]["t0"], "1");
}

#[test]
fn analyze_verdicts() {
    let ws = Workspace::new();
    let cases = [
        (SEGRE, "direct sum (2 summands)"),
        (X2Y, "limit of 2-fold direct sums"),
        (GENERIC, "trivial centroid"),
        (IRRATIONAL, "undetermined over the working field (factor x^2 - 2)"),
    ];
    for (i, (content, verdict)) in cases.iter().enumerate() {
        let t = ws.file(&format!("t{i}.json"), content);
        let out = svtensor(&["analyze", arg(&t)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains(&format!("verdict: {verdict}")), "{text}");
    }
    let t = ws.file("x2y.json", X2Y);
    let a = artifact(&["analyze", arg(&t)]);
    let local = &a["result"]["locals"][0];
    assert_eq!(local["index"], 2);
    assert_eq!(local["witness"]["summands"].as_array().unwrap().len(), 2);
}

#[test]
fn non_concise_input_is_reduced_by_analyze() {
    let ws = Workspace::new();
    let t = ws.file("t.json", CUBIC);
    let a = artifact(&["analyze", arg(&t)]);
    assert!(a["result"]["notice"].as_str().unwrap().contains("not concise"));
    assert_eq!(a["result"]["ranks"], serde_json::json!([5]));
    assert_eq!(a["result"]["verdict"]["verdict"], "limit_of_direct_sums");
    assert_eq!(a["result"]["verdict"]["summands"], 3);
}

#[test]
fn prime_field_flag_changes_the_verdict() {
    let ws = Workspace::new();
    let t = ws.file("t.json", IRRATIONAL);
    let q = artifact(&["split", arg(&t)]);
    assert_eq!(q["result"]["verdict"]["verdict"], "undetermined");
    let p = artifact(&["--field", "Fp:7", "split", arg(&t)]);
    assert_eq!(p["result"]["verdict"]["verdict"], "direct_sum");
    assert_eq!(p["tensor"]["field"], "Fp:7");
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    let cubic = ws.file("cubic.json", CUBIC);
    assert_eq!(svtensor(&["centroid", arg(&cubic)]).status.code(), Some(2));
    let fermat = ws.file("fermat.json", FERMAT);
    assert_eq!(svtensor(&["normal-form", arg(&fermat)]).status.code(), Some(2));
    let broken = ws.file("broken.json", "{\"field\": \"Q\"");
    assert_eq!(svtensor(&["centroid", arg(&broken)]).status.code(), Some(1));
    assert_eq!(svtensor(&["centroid", arg(&ws.path("missing.json"))]).status.code(), Some(1));
    let t = ws.file("t.json", FERMAT);
    assert_eq!(svtensor(&["--field", "Fp:8", "split", arg(&t)]).status.code(), Some(1));
    assert_eq!(svtensor(&["--field", "Fp:3", "split", arg(&t)]).status.code(), Some(2));
}

#[test]
fn artifacts_round_trip_through_check() {
    let ws = Workspace::new();
    let segre = ws.file("segre.json", SEGRE);
    let cubic = ws.file("cubic.json", CUBIC);
    let shift = ws.file("shift.json", SHIFT);
    let x2y = ws.file("x2y.json", X2Y);
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("centroid", vec!["centroid", arg(&segre)]),
        ("split", vec!["split", arg(&segre)]),
        ("normal", vec!["normal-form", arg(&cubic), "--element", arg(&shift)]),
        ("auto", vec!["normal-form", arg(&x2y)]),
        ("degen", vec!["degenerate", arg(&cubic), "--element", arg(&shift), "--omega", "1,0,-1", "--evaluate", "1"]),
        ("analysis", vec!["analyze", arg(&x2y)]),
    ];
    for (name, mut args) in runs {
        let out = ws.path(&format!("{name}.artifact.json"));
        args.extend(["-o", arg(&out)]);
        assert!(svtensor(&args).status.success(), "{name}");
        let checked = svtensor(&["check", arg(&out)]);
        assert!(checked.status.success(), "{name}: {}", String::from_utf8_lossy(&checked.stderr));
        assert!(String::from_utf8(checked.stdout).unwrap().contains("ok: recomputed result matches"));
    }
}

#[test]
fn tampered_artifacts_fail_the_check() {
    let ws = Workspace::new();
    let t = ws.file("t.json", FERMAT);
    let out = ws.path("a.json");
    assert!(svtensor(&["split", arg(&t), "-o", arg(&out)]).status.success());
    let mut a: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    a["result"]["summands"][0]["tensor"]["terms"][0]["coeff"] = "2".into();
    fs::write(&out, serde_json::to_string(&a).unwrap()).unwrap();
    let checked = svtensor(&["check", arg(&out)]);
    assert_eq!(checked.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&checked.stderr).contains("check failed"));
}

#[test]
fn output_is_deterministic() {
    let ws = Workspace::new();
    let t = ws.file("t.json", IRRATIONAL);
    let a = svtensor(&["--json", "--field", "Fp:7", "--seed", "5", "analyze", arg(&t)]);
    let b = svtensor(&["--json", "--field", "Fp:7", "--seed", "5", "analyze", arg(&t)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
