//! End-to-end runs of the `loopstream` binary. Reports are compared with
//! the files in `golden/`; set `UPDATE_GOLDEN=1` to rewrite them.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopstream")).args(args).current_dir(root()).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn json(path: &Path) -> (String, Value) {
    let text = std::fs::read_to_string(path).unwrap();
    let v = serde_json::from_str(&text).unwrap();
    (text, v)
}

const FIXTURES: &str = "crates/cli/tests/fixtures";

#[test]
fn refactor_report_is_stable() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("r.json");
    let o = run(&[
        "refactor",
        "corpus/filter_and_double.minij",
        "--no-ga",
        "--no-timing",
        "--out-dir",
        out.path().to_str().unwrap(),
        "--json",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (text, v) = json(&report);
    golden("filter_and_double.json", &text);
    assert_eq!(v["outcome"], "Refactored");
    for name in ["filter_and_double.refactored.java", "filter_and_double.refactored.pipeline", "filter_and_double.baseline.java"] {
        assert!(out.path().join(name).exists(), "{name} not written");
    }
    let java = std::fs::read_to_string(out.path().join("filter_and_double.refactored.java")).unwrap();
    assert_eq!(java, v["javaText"].as_str().unwrap());
    assert!(stdout(&o).contains("=> newList"));
}

#[test]
fn emit_selects_output_files() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["refactor", "corpus/remove_negatives.minij", "--no-ga", "--emit", "pipeline", "--out-dir", out.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.path().join("remove_negatives.refactored.pipeline").exists());
    assert!(!out.path().join("remove_negatives.refactored.java").exists());
    assert!(!stdout(&o).contains("void removeNeg"));
}

#[test]
fn zero_timeout_is_no_refactoring() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("r.json");
    let o = run(&[
        "refactor",
        "corpus/filter_and_double.minij",
        "--timeout",
        "0",
        "--out-dir",
        out.path().to_str().unwrap(),
        "--json",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let (_, v) = json(&report);
    assert_eq!(v["outcome"], "NoRefactoring");
    assert_eq!(v["reason"]["reason"], "Timeout");
    assert!(v["pipelineText"].is_null() && v["javaText"].is_null());
}

#[test]
fn faulting_original_is_not_refactorable() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("r.json");
    let o = run(&[
        "refactor",
        &format!("{FIXTURES}/oob.minij"),
        "--no-ga",
        "--no-timing",
        "--out-dir",
        out.path().to_str().unwrap(),
        "--json",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let (text, v) = json(&report);
    golden("oob.json", &text);
    assert_eq!(v["reason"]["reason"], "NotRefactorable");
    assert_eq!(v["reason"]["status"], "IndexOutOfBoundsException");
}

#[test]
fn parse_errors_exit_one_with_position() {
    let o = run(&["refactor", &format!("{FIXTURES}/broken.minij"), "--out-dir", std::env::temp_dir().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("broken.minij:3:1: syntax error"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["refactor"])), 1);
    assert_eq!(code(&run(&["refactor", "corpus/remove_negatives.minij", "--bogus"])), 1);
    assert_eq!(code(&run(&["refactor", "corpus/remove_negatives.minij", "--values", "3..-3"])), 1);
    assert_eq!(code(&run(&["refactor", "corpus/remove_negatives.minij", "--mode", "fast"])), 1);
    assert_eq!(code(&run(&["refactor", "no/such/file.minij"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_rejects_sum_only_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("sum.pipeline");
    std::fs::write(&cand, "l.stream().reduce(0, Integer::sum) => sum\n").unwrap();
    let report = dir.path().join("v.json");
    let o = run(&[
        "verify",
        "corpus/sum_and_trim.minij",
        cand.to_str().unwrap(),
        "--no-timing",
        "--json",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let (text, v) = json(&report);
    golden("verify_sum_only.json", &text.replace(cand.to_str().unwrap(), "sum.pipeline"));
    assert_eq!(v["verdict"], "Fail");
    // The pre-state puts at least one element into p.
    let cons: Vec<&str> = v["counterexample"]["constructors"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(cons.iter().any(|c| c.starts_with("add h p ")), "{cons:?}");
}

#[test]
fn verify_accepts_correct_and_identity_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("correct.pipeline");
    std::fs::write(&cand, "list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList\n").unwrap();
    let o = run(&["verify", "corpus/filter_and_double.minij", cand.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let empty = dir.path().join("identity.pipeline");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["verify", &format!("{FIXTURES}/untouched.minij"), empty.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_reports_pipeline_position() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("bad.pipeline");
    std::fs::write(&cand, "list.stream().filter(v -> v > 0).mop(v -> 2 * v) => newList\n").unwrap();
    let o = run(&["verify", "corpus/filter_and_double.minij", cand.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 1: 1:38"), "{}", stderr(&o));
}

#[test]
fn empty_corpus_has_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("c.json");
    let o = run(&["corpus", dir.path().to_str().unwrap(), "--json", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, v) = json(&report);
    assert_eq!(v["total"], 0);
    assert_eq!(v["files"].as_array().unwrap().len(), 0);
    assert!(stdout(&o).contains("engine 0/0"));
}

#[test]
fn unparsable_corpus_file_is_an_error_row() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = root().join(FIXTURES);
    std::fs::copy(fixtures.join("broken.minij"), dir.path().join("a_broken.minij")).unwrap();
    std::fs::copy(root().join("corpus/remove_negatives.minij"), dir.path().join("b_removeneg.minij")).unwrap();
    std::fs::copy(fixtures.join("oob.minij"), dir.path().join("c_oob.minij")).unwrap();
    let report = dir.path().join("c.json");
    let o = run(&["corpus", dir.path().to_str().unwrap(), "--no-ga", "--json", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, v) = json(&report);
    let outcomes: Vec<&str> = v["files"].as_array().unwrap().iter().map(|f| f["outcome"].as_str().unwrap()).collect();
    assert_eq!(outcomes, ["Error", "Refactored", "NoRefactoring"]);
    assert_eq!((v["semantic"].as_u64(), v["errors"].as_u64(), v["total"].as_u64()), (Some(1), Some(1), Some(3)));
}

#[test]
fn corpus_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let reports: Vec<(String, String)> = [(&a, "1"), (&b, "2")]
        .iter()
        .map(|(dir, jobs)| {
            let report = dir.path().join("c.json");
            let o = run(&[
                "corpus",
                "corpus",
                "--no-ga",
                "--seed",
                "7",
                "--no-timing",
                "--jobs",
                jobs,
                "--out-dir",
                dir.path().to_str().unwrap(),
                "--json",
                report.to_str().unwrap(),
            ]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            (std::fs::read_to_string(report).unwrap(), stdout(&o))
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    let v: Value = serde_json::from_str(&reports[0].0).unwrap();
    let files = v["files"].as_array().unwrap();
    let count = |f: &dyn Fn(&Value) -> bool| files.iter().filter(|r| f(r)).count() as u64;
    assert_eq!(v["semantic"].as_u64().unwrap(), count(&|r| r["outcome"] == "Refactored"));
    assert_eq!(v["baseline"].as_u64().unwrap(), count(&|r| r["baseline"] == "Rewritten"));
    assert_eq!(v["union"].as_u64().unwrap(), count(&|r| r["outcome"] == "Refactored" || r["baseline"] == "Rewritten"));
    assert!(v["semantic"].as_u64().unwrap() >= 11);
    assert!(v["baseline"].as_u64().unwrap() <= 6);
    assert!(v["union"].as_u64() >= v["semantic"].as_u64());
}
