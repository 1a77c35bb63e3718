use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use treehom::formats::parse_wtg;
use treehom::grammar::semantics;
use treehom::oracle::{compare_semantics, EnumerationBudget};
use treehom::transform::hom_image;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn treehom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treehom"))
        .args(args)
        .env_remove("TREEHOM_CAP")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decide_prints_verdicts() {
    let counting = data("counting.wtg");
    let o = treehom(&[
        "decide",
        "-a",
        path(&counting),
        "-m",
        path(&data("example1.hom")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "NONREGULAR");

    let o = treehom(&[
        "decide",
        "-a",
        path(&counting),
        "-m",
        path(&data("identity.hom")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "REGULAR");
}

#[test]
fn decide_json_names_the_witness() {
    let o = treehom(&[
        "decide",
        "-a",
        path(&data("unary.wtg")),
        "-m",
        path(&data("square.hom")),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "NONREGULAR");
    assert_eq!(v["witness"]["cycle_state"], "q");
    assert_eq!(v["witness"]["pair"], serde_json::json!(["1", "2"]));
}

#[test]
fn regular_decision_emits_an_equivalent_grammar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lin.wtg");
    let a = data("counting.wtg");
    let h = data("identity.hom");
    let o = treehom(&[
        "decide",
        "-a",
        path(&a),
        "-m",
        path(&h),
        "--emit-grammar",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lin = parse_wtg(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(lin.shape().wta);
    let a = parse_wtg(&std::fs::read_to_string(a).unwrap()).unwrap();
    let cmp = compare_semantics(&a, &lin, &EnumerationBudget::size(7)).unwrap();
    assert!(cmp.is_equal(), "{cmp:?}");
}

#[test]
fn nonregular_decision_writes_witness_files() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w");
    let o = treehom(&[
        "decide",
        "-a",
        path(&data("counting.wtg")),
        "-m",
        path(&data("example1.hom")),
        "--emit-witness",
        path(&w),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["g1.wtg", "g2.wtg", "image.wtg", "witness.txt"] {
        assert!(w.join(f).is_file(), "missing {f}");
    }
    let text = std::fs::read_to_string(w.join("witness.txt")).unwrap();
    assert!(text.contains("witness_pair:"), "{text}");
    for f in ["g1.wtg", "g2.wtg", "image.wtg"] {
        parse_wtg(&std::fs::read_to_string(w.join(f)).unwrap()).unwrap();
    }
}

#[test]
fn image_output_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("image.wtg");
    let o = treehom(&[
        "image",
        "-a",
        path(&data("counting.wtg")),
        "-m",
        path(&data("example1.hom")),
        "-o",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = parse_wtg(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let a = parse_wtg(&std::fs::read_to_string(data("counting.wtg")).unwrap()).unwrap();
    let h = treehom::formats::parse_hom(&std::fs::read_to_string(data("example1.hom")).unwrap())
        .unwrap();
    assert_eq!(written.canonical(), hom_image(&a, &h).unwrap().canonical());
}

#[test]
fn eval_and_apply_hom() {
    let o = treehom(&[
        "eval",
        "-g",
        path(&data("counting.wtg")),
        "-t",
        "s(g(a), g(a))",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4");

    let o = treehom(&[
        "apply-hom",
        "-m",
        path(&data("example1.hom")),
        "-t",
        "s(a, g(a))",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "d(g(a), g(g(a)), a)");
}

#[test]
fn linearize_and_its_blowup_guard() {
    let small = data("small.wtg");
    let o = treehom(&["linearize", "-g", path(&small)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lin = parse_wtg(&stdout(&o)).unwrap();
    let t = treehom::formats::parse_term("s(a, a)").unwrap();
    assert_eq!(semantics(&lin, &t).to_string(), "6");

    let o = treehom(&["linearize", "-g", path(&small), "--cap", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("blowup"), "{}", stderr(&o));
}

#[test]
fn cap_is_read_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_treehom"))
        .args(["linearize", "-g", path(&data("small.wtg"))])
        .env("TREEHOM_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn decompose_writes_both_grammars() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = treehom(&[
        "decompose",
        "-g",
        path(&data("decomp.wtg")),
        "-o",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["g1.wtg", "g2.wtg", "witness.txt"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn pump_prints_distinct_taller_trees() {
    let o = treehom(&[
        "pump",
        "-g",
        path(&data("decomp.wtg")),
        "-q",
        "q0",
        "-t",
        "g(g(g(g(g(a)))))",
        "-n",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "g(g(g(g(g(g(a))))))");
    assert!(lines.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn pump_needs_a_tall_tree() {
    let o = treehom(&[
        "pump",
        "-g",
        path(&data("decomp.wtg")),
        "-q",
        "q0",
        "-t",
        "g(a)",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn graph_reports_the_duplication_property() {
    let o = treehom(&["graph", "-g", path(&data("example1.wtg"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("q -> q_f"), "{text}");
    assert!(text.contains("duplication property: yes"), "{text}");

    let o = treehom(&["graph", "-g", path(&data("counting.wtg")), "--dot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph"), "{}", stdout(&o));
}

#[test]
fn oracle_subcommands() {
    let c = data("counting.wtg");
    let o = treehom(&[
        "oracle",
        "compare",
        "-g",
        path(&c),
        "-h",
        path(&c),
        "--max-size",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("EQUAL"), "{}", stdout(&o));

    let o = treehom(&[
        "oracle",
        "image",
        "-a",
        path(&c),
        "-m",
        path(&data("example1.hom")),
        "-t",
        "d(a, g(a), a)",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn parse_errors_point_at_the_input() {
    let o = treehom(&["eval", "-g", path(&data("counting.wtg")), "-t", "s(g(a)"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("1:7"), "{err}");
    assert!(err.contains('^'), "{err}");
}

#[test]
fn bad_grammar_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.wtg");
    std::fs::write(&bad, "wtg { alphabet { a/0 } states { q } final { r: 1 } }").unwrap();
    let o = treehom(&["trim", "-g", path(&bad)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("bad.wtg"), "{}", stderr(&o));
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(treehom(&["bogus"]).status.code(), Some(2));
    assert_eq!(treehom(&["eval", "-g"]).status.code(), Some(2));
    let o = treehom(&["eval", "-g", "/nonexistent/x.wtg", "-t", "a"]);
    assert_eq!(o.status.code(), Some(1));
    let o = treehom(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decide"));
}

#[test]
fn run_writes_to_the_given_streams() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let c = data("counting.wtg");
    let code = treehom::cli::run(
        ["treehom", "eval", "-g", path(&c), "-t", "g(g(a))"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, treehom::cli::EXIT_OK);
    assert_eq!(String::from_utf8(out).unwrap().trim(), "4");
    assert!(err.is_empty());
}
