use std::path::PathBuf;
use std::process::{Command, Output};

fn colp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colp"))
        .args(args)
        .env_remove("COLP_FIXTURE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn prove_ground_list() {
    let o = colp(&["prove", "listnat", "list(cons(0,nil))", "--fuel", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Proved\n");
}

#[test]
fn prove_reports_the_three_outcomes() {
    let o = colp(&["prove", "gc", "connected(X,Y)", "--fuel", "12"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(1), "FuelExhausted\n")
    );
    let o = colp(&["prove", "listnat", "list(cons(X,Y))"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(1), "FailedFinite\n")
    );
    let o = colp(&["prove", "listnat", "list(cons(0,nil))", "--trace"]);
    assert_eq!(
        stdout(&o),
        "Proved\nlist(cons(0,nil)) by clause 4\n  nat(0) by clause 1\n  list(nil) by clause 3\n"
    );
}

#[test]
fn solve_gc_first_answer() {
    let o = colp(&["solve", "gc", "connected(X,Y)", "--fuel", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("{Y->X}  (1 steps)"));
}

#[test]
fn solve_listnat_answers_in_order() {
    let o = colp(&["solve", "listnat", "list(cons(X,Y))", "--max-answers", "2"]);
    assert_eq!(
        stdout(&o),
        "{X->0, Y->nil}  (3 steps)\n{X->s(0), Y->nil}  (4 steps)\n"
    );
    let o = colp(&["solve", "bad", "bad(X)", "--fuel", "5"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(1), "no answers within 5 steps\n")
    );
}

#[test]
fn gc_tree_dot_matches_golden() {
    let o = colp(&[
        "tree",
        "gc",
        "connected(X,Y)",
        "--depth",
        "4",
        "--format",
        "dot",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("gc_connected_depth4.dot"));
}

#[test]
fn listnat_plus_tree_matches_golden() {
    let o = colp(&["tree", "listnat_plus", "list(cons(0,nil))", "--depth", "4"]);
    assert_eq!(stdout(&o), golden("listnat_plus_ground_depth4.txt"));
}

#[test]
fn json_tree_parses() {
    let o = colp(&[
        "tree",
        "listnat",
        "list(cons(X,Y))",
        "--format",
        "json",
        "--depth",
        "2",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["root"]["atom"], "list(cons(x1,x2))");
    assert_eq!(v["root"]["or"][0]["clause"], 4);
}

#[test]
fn approx_ground_level_two() {
    let o = colp(&["approx", "ground_abcd", "a", "--depth", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["approximant"],
        "(a, {{(b, ∅), (c, ∅)}, {(b, ∅), (d, {{a, c}})}})"
    );
}

#[test]
fn checks_hold_on_fixtures() {
    for args in [
        &["check", "monad", "gc", "--samples", "200"][..],
        &["check", "dist", "listnat"],
        &["check", "bridge", "listnat"],
        &["check", "inj", "gc"],
        &["check", "lax", "listnat"],
        &["check", "saturation", "gc"],
        &["oracle", "ground_abcd"],
    ] {
        let o = colp(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v.to_string().contains("violations"), "{args:?}");
    }
}

#[test]
fn sequential_flag_gives_the_same_report() {
    let par = colp(&["check", "lax", "gc"]);
    let seq = colp(&["--sequential", "check", "lax", "gc"]);
    assert_eq!(par.stdout, seq.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        colp(&["tree", "gc", "connected(X,Y)", "--format", "svg"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(colp(&["prove", "gc", "connected(X"]).status.code(), Some(2));
    assert_eq!(
        colp(&["prove", "no_such_program", "p"]).status.code(),
        Some(2)
    );
    let o = colp(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fixture_directory_from_environment() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("colp-fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("tiny.lp"), "p :- q.\nq.\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_colp"))
        .args(["prove", "tiny", "p"])
        .env("COLP_FIXTURE_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(0), "Proved\n")
    );
    let path = dir.join("tiny.lp");
    let o = colp(&["parse", path.to_str().unwrap()]);
    assert_eq!(stdout(&o), "p :- q.\nq.\n");
}
