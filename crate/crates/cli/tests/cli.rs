use std::fs;
use std::path::PathBuf;
use std::process::Command;

use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_strict-heap"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
        stderr: String::from_utf8(out.stderr).expect("utf-8"),
    }
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, text).expect("write temp file");
    p.to_string_lossy().into_owned()
}

#[test]
fn eval_of_a_doubly_assigned_cell_is_false() {
    let r = run(&["eval", "a |-> b * a |-> d"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "false\n");
}

#[test]
fn eval_prints_the_heap() {
    let r = run(&["eval", "a |-> b * b |-> c"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "{a -> b, b -> c}\n");
    assert!(r.stderr.is_empty());
}

#[test]
fn general_right_operands_only_warn() {
    let r = run(&["eval", "a |-> b * (b |-> c * c |-> d)"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "{a -> b, b -> c, c -> d}\n");
    assert!(r
        .stderr
        .contains("warning: right operand of `*` is not a points-to"));
}

#[test]
fn check_partial_object_spec_is_sat() {
    let dir = TempDir::new().unwrap();
    let heap = file(&dir, "h.heap", "a .f1 -> x\na .f2 -> y\n");
    let formula = file(&dir, "f.sl", "check a.f1 |-> x * true(a)\n");
    let r = run(&["check", &heap, &formula]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("sat\n"));
    assert!(r.stdout.contains("binding {a = a, x = x}"));
}

#[test]
fn check_reports_unsat() {
    let r = run(&["check", "a -> b; b -> c", "a |-> b"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.stdout, "unsat\n");
}

#[test]
fn check_uses_definitions_from_both_sources() {
    let dir = TempDir::new().unwrap();
    let defs = file(
        &dir,
        "defs.sl",
        "def list(x) = x |-> nil | ex y . x |-> y * list(y)\n",
    );
    let heap = file(&dir, "h.heap", "stack x -> a\na -> b\nb -> nil\n");
    let formula = file(
        &dir,
        "f.sl",
        "def two(x) = ex y . x |-> y * y |-> nil\nlist(x)\ntwo(x)\n",
    );
    let r = run(&["--defs", &defs, "check", &heap, &formula]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.matches("sat\n").count(), 2);
}

#[test]
fn equiv_prints_a_witness() {
    let r = run(&["equiv", "a |-> b", "a |-> c"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("inequivalent\nwitness {a -> b}\n"));
    let r = run(&["equiv", "a |-> b * b |-> c", "b |-> c * a |-> b"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "equivalent\n");
}

#[test]
fn equiv_respects_the_universe() {
    let r = run(&[
        "--universe",
        "locations=a,b;labels=eps;max_edges=2",
        "equiv",
        "true",
        "emp",
    ]);
    assert_eq!(r.code, 1);
    let r = run(&[
        "--universe",
        "locations=a,b,c,d,e,f,g;max_edges=none",
        "equiv",
        "true",
        "emp",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("budget"));
}

#[test]
fn simplify_and_invert() {
    let r = run(&["simplify", "a |-> b * emp * (a |-> b)^-1"]);
    assert_eq!(r.stdout, "emp\n");
    let r = run(&["simplify", "true(a) * true(a)"]);
    assert_eq!(r.stdout, "true(a)\n");
    let r = run(&["invert", "((a |-> b) * (b |-> c))^-1"]);
    assert_eq!(r.stdout, "(a |-> b)^-1 * (b |-> c)^-1\n");
    assert_eq!(r.code, 0);
}

#[test]
fn laws_pass_on_a_small_universe() {
    let r = run(&[
        "laws",
        "--universe",
        "locations=a,b;labels=eps,f;max_edges=2",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout.lines().count(), 9);
    assert!(r.stdout.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn frame_applies_a_spec() {
    let dir = TempDir::new().unwrap();
    let specs = file(
        &dir,
        "ops.spec",
        "spec link: {x |-> nil} -> {x |-> a * a |-> nil}\nspec dispose: {x |-> y} -> {emp}\n",
    );
    let heap = file(&dir, "h.heap", "stack x -> x\nx -> nil\nq -> nil\n");
    let r = run(&["frame", &heap, &specs, "link"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("frame {q -> nil}"));
    assert!(r.stdout.contains("result {n0 -> nil, q -> nil, x -> n0}"));

    let shared = file(&dir, "shared.heap", "stack x -> x\nx -> v\nw -> x\n");
    let r = run(&["frame", &shared, &specs, "dispose"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.stdout, "failure\n");
    assert!(r.stderr.contains("no independent footprint"));
}

#[test]
fn frame_rejects_inverted_specs() {
    let r = run(&[
        "frame",
        "x -> nil",
        "spec bad: {(x |-> nil)^-1} -> {emp}",
        "bad",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("inversion"));
}

#[test]
fn parse_errors_exit_with_two() {
    let r = run(&["eval", "a |-> "]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 1, column 7"));
    assert_eq!(run(&["simplify"]).code, 2);
    assert_eq!(run(&["--universe", "colour=red", "laws"]).code, 2);
    assert_eq!(run(&["check", "a -> b; a -> c", "true"]).code, 2);
}

#[test]
fn json_output() {
    let r = run(&["--json", "equiv", "a |-> b", "a |-> c"]);
    assert_eq!(r.code, 1);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["command"], "equiv");
    assert_eq!(v["verdict"], "inequivalent");
    assert_eq!(v["witness"]["heap"], "{a -> b}");
    assert!(v["diagnostics"].is_array());

    let r = run(&["--json", "check", "a -> b", "a |-> b"]);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdict"], "sat");
    assert_eq!(v["bindings"][0]["a"], "a");

    let r = run(&["--json", "eval", "a |-> "]);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdict"], "error");
}

#[test]
fn samples_are_reproducible() {
    let a = run(&["sample", "--count", "5", "--seed", "3"]);
    let b = run(&["sample", "--count", "5", "--seed", "3"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout.lines().count(), 5);
}
