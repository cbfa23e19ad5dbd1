use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn organon() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_organon"));
    c.env_remove("ORGANON_BOUNDS");
    c
}

fn dataset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("datasets").join(format!("{name}.org"))
}

fn run(args: &[&str]) -> Output {
    organon().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn script(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn golden(name: &str) {
    let path = dataset(name);
    let o = run(&["compare", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}.compare.txt"))).unwrap();
    assert_eq!(stdout(&o), expected);
}

#[test]
fn golden_fano() {
    golden("fano");
}

#[test]
fn golden_family() {
    golden("aristotle_family");
}

#[test]
fn golden_syllogisms() {
    golden("syllogisms");
}

#[test]
fn bundled_prefix_matches_file() {
    let a = run(&["eval", "bundled:syllogisms"]);
    let b = run(&["eval", dataset("syllogisms").to_str().unwrap()]);
    assert_eq!(stdout(&a), stdout(&b));
    let listing = run(&["dataset"]);
    assert_eq!(stdout(&listing), "fano\naristotle_family\nsyllogisms\n");
}

#[test]
fn fano_axiom_is_true_in_json() {
    let o = run(&["eval", "--json", "bundled:fano"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["queries"][0]["outcome"]["kind"], "holds");
    assert_eq!(v["queries"][0]["outcome"]["verdict"], "true");
    assert_eq!(v["bounds"]["enum_cap"], 100000);
}

fn without_timing(text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn json_reports_are_deterministic() {
    for name in ["aristotle_family", "syllogisms"] {
        let target = format!("bundled:{name}");
        let a = run(&["compare", "--json", &target]);
        let b = run(&["compare", "--json", &target]);
        let (a, b) = (without_timing(&stdout(&a)), without_timing(&stdout(&b)));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn empty_script_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "empty.org", "");
    let o = run(&["eval", "--json", &p]);
    assert_eq!(o.status.code(), Some(0));
    let v = without_timing(&stdout(&o));
    assert_eq!(v["queries"], serde_json::json!([]));
    assert_eq!(v["definitions"], serde_json::json!([]));
}

#[test]
fn parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "bad.org", "universe a\nquery truth missing a\n");
    let o = run(&["eval", &p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unbound name `missing` at 2:13"));
    assert_eq!(run(&["eval", "/no/such/file.org"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn evaluation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "nm.org", "relation f/2 = (a, b)\ndef m x y := rec U . f x y & !U x y\n");
    let o = run(&["eval", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non-monotone"));

    let o = run(&["eval", "--bounds", "6,8,5", "bundled:aristotle_family"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bound exceeded"));
}

#[test]
fn seed_flag_reaches_binders() {
    let dir = tempfile::tempdir().unwrap();
    let p = script(
        &dir,
        "sib.org",
        "relation mother/2 = (ann, bob), (ann, cal), (dee, eve)\n\
         def sibling y z := mother (eps x . mother x y) z\n\
         query relation sibling\n",
    );
    let plain = run(&["eval", &p]);
    assert!(stdout(&plain).contains("0 tuples"));
    let o = run(&["eval", "--seed", "x={ann}", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid seed for `x`"));
    assert_eq!(run(&["eval", "--seed", "nonsense", &p]).status.code(), Some(1));
}

#[test]
fn bounds_from_environment() {
    let o = organon().env("ORGANON_BOUNDS", "6,8,5").args(["eval", "bundled:aristotle_family"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = organon().env("ORGANON_BOUNDS", "oops").args(["eval", "bundled:fano"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupted_fano_is_false_on_both_sides() {
    let text = std::fs::read_to_string(dataset("fano")).unwrap().replace("(p3, l7), (p5, l7), (p6, l7)", "(p3, l7), (p5, l7)");
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "fano_bad.org", &text);
    let o = run(&["compare", "--json", &p]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for q in v["queries"].as_array().unwrap().iter().filter(|q| q["outcome"]["kind"] == "holds") {
        assert_eq!(q["outcome"]["verdict"], "false");
        assert_eq!(q["comparison"]["status"], "agree");
    }
}

#[test]
fn disagreement_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "dis.org", "relation mother/2 = (a, b), (a, c)\ndef sibling y z := mother y z\nquery relation sibling\n");
    let o = run(&["compare", &p]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("DISAGREE"));
    assert_eq!(run(&["eval", &p]).status.code(), Some(0));
}

#[test]
fn empty_extension_is_classified_indeterminate() {
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "u.org", "universe a\nrelation unicorn/1 =\nrelation thing/1 = a\nquery categorical all unicorn thing\n");
    let o = run(&["compare", "--json", &p]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["queries"][0]["outcome"]["verdict"], "indeterminate");
    assert_eq!(v["queries"][0]["comparison"]["status"], "indeterminate");
}

#[test]
fn data_file_is_loaded_before_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    std::fs::write(
        &data,
        r#"{"atoms": ["ann", "bob", "cal"], "relations": {"mother": {"arity": 2, "tuples": [["ann", "bob"], ["ann", "cal"]]}}, "constants": {"boss": "ann"}}"#,
    )
    .unwrap();
    let p = script(&dir, "s.org", "def sibling y z := mother (exists x . mother x y) z\nquery relation sibling\nquery truth mother boss bob\n");
    let o = run(&["compare", "--data", data.to_str().unwrap(), &p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("4 tuples match"));
    assert!(text.contains("oracle (data): agree, engine ⊤, oracle true"));
}

#[test]
fn abstract_command() {
    let o = run(&["abstract", "--vars", "x", "x"]);
    assert_eq!(stdout(&o), "S K K\n");
    let o = run(&["abstract", "--vars", "x,y", "--verify", "20", "--script", "bundled:aristotle_family", "mother y x"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verified on 20 random argument tuples"));
    assert_eq!(run(&["abstract", "--vars", "x", "!x"]).status.code(), Some(2));
}

fn repl(input: &str, extra: &[&str]) -> Output {
    let mut child = organon()
        .arg("repl")
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn repl_meta_commands_and_errors() {
    let o = repl(":bounds\nquery truth nope a\n:env\n:quit\nquery facts a\n", &[]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("level_bound 6 set_size_bound 8 enum_cap 100000\n"));
    assert!(out.contains("atoms:"));
    assert!(stderr(&o).contains("unbound name `nope`"));
}

#[test]
fn repl_matches_batch() {
    let lines = "relation mother/2 = (ann, bob), (ann, cal)\n\
                 def child x y := mother y x\n\
                 query truth child bob ann\n\
                 query truth child ann bob\n";
    let dir = tempfile::tempdir().unwrap();
    let p = script(&dir, "child.org", lines);
    let batch = run(&["eval", "--json", &p]);
    let batch: serde_json::Value = serde_json::from_str(&stdout(&batch)).unwrap();
    let o = repl(lines, &["--json"]);
    let verdicts: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["outcome"].clone()).collect();
    let expected: Vec<serde_json::Value> = batch["queries"].as_array().unwrap().iter().map(|q| q["outcome"].clone()).collect();
    assert_eq!(verdicts, expected);
}

#[test]
fn repl_continuation_lines() {
    let o = repl("relation r/2 = (a, b), \\\n  (b, c)\nquery relation r\n", &[]);
    assert!(stdout(&o).contains("2 tuples"), "{}", stdout(&o));
}
