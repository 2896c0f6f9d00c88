//! Acceptance gate: one PASS/FAIL line per criterion, then a single
//! assertion that all of them passed.

#[path = "../../core/tests/support/heap_gen.rs"]
mod heap_gen;
#[path = "../../core/tests/support/jst_model.rs"]
mod jst_model;

use loopstream::cegis::{synthesize, Problem};
use loopstream::codegen::read_java;
use loopstream::frontend::{compile, IrProgram};
use loopstream::heap::{Bounds, ProgramState, Universe, NIL};
use loopstream::jst::{OutputTerm, Pipeline};
use loopstream::vcgen::{check_end_to_end, list_names, outputs, Candidate, OutputVar, Verdict, VerifyConfig};
use loopstream_cli::{refactor_source, verify_source, ModeArg, Options, Outcome, RefactorReport, VerifyVerdict};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

struct File {
    name: String,
    ir: IrProgram,
    report: RefactorReport,
    elapsed: Duration,
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn source(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

fn load_corpus(opts: &Options) -> Vec<File> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".minij"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let src = source(&name);
            let (_, ir) = compile(&src).unwrap();
            let t = Instant::now();
            let report = refactor_source(&name, &src, opts).unwrap();
            File { name, ir, report, elapsed: t.elapsed() }
        })
        .collect()
}

fn parse(text: &str, ir: &IrProgram) -> Candidate {
    Candidate::parse(text, &outputs(ir), &list_names(ir)).unwrap_or_else(|e| panic!("{text}: {e}"))
}

#[derive(Debug, PartialEq, Eq)]
enum Seen {
    List(Option<Vec<i32>>),
    Scalar(String),
}

fn observe(st: &ProgramState, outs: &[OutputVar]) -> Vec<Seen> {
    outs.iter()
        .map(|o| {
            if o.is_list() {
                let h = st.heap.refs[o.slot];
                Seen::List((h != NIL).then(|| st.heap.to_vec(h)))
            } else {
                Seen::Scalar(format!("{:?}", st.scalars[o.slot]))
            }
        })
        .collect()
}

fn applied(c: &Candidate, outs: &[OutputVar], pre: &ProgramState, out: &mut ProgramState, buf: &mut Vec<i32>) -> Vec<Seen> {
    c.apply(outs, pre, None, out, buf);
    observe(out, outs)
}

/// Index of the first state of `u` where `a` and `b` produce different
/// outputs.
fn first_difference(ir: &IrProgram, u: &Universe, a: &Candidate, b: &Candidate) -> Option<u64> {
    let outs = outputs(ir);
    let (mut pre, mut out, mut buf) = (u.blank(), u.blank(), Vec::new());
    (0..u.len()).find(|&i| {
        u.state_at(i, &mut pre);
        applied(a, &outs, &pre, &mut out, &mut buf) != applied(b, &outs, &pre, &mut out, &mut buf)
    })
}

/// Every candidate of total length at most `max` in the synthesis grammar,
/// including forms the search itself never proposes.
fn all_candidates(p: &Problem, max: usize) -> Vec<Candidate> {
    let per_output: Vec<Vec<OutputTerm>> = p
        .outs
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let mut terms = vec![OutputTerm::Unchanged];
            let mut pipelines: Vec<Pipeline> = Vec::new();
            let mut frontier: Vec<Pipeline> = p.sources.iter().map(|&s| Pipeline { source: s, stages: vec![] }).collect();
            for depth in 0..=max {
                pipelines.extend(frontier.iter().cloned());
                if depth == max {
                    break;
                }
                frontier = frontier
                    .iter()
                    .flat_map(|q| {
                        p.grammar.stages.iter().map(move |&s| {
                            let mut q = q.clone();
                            q.stages.push(s);
                            q
                        })
                    })
                    .collect();
            }
            if o.is_list() {
                for q in &pipelines {
                    terms.push(OutputTerm::Replace(q.clone()));
                    terms.push(OutputTerm::Append(q.clone()));
                }
                if max >= 1 {
                    terms.extend(p.grammar.pool.iter().map(|&c| OutputTerm::AddLast(c)));
                }
            } else {
                for q in pipelines.iter().filter(|q| q.stages.len() < max) {
                    terms.extend(p.terminals[k].iter().map(|&t| OutputTerm::Scalar(q.clone(), t)));
                }
            }
            terms
        })
        .collect();
    let mut out = vec![(Vec::new(), 0usize)];
    for terms in &per_output {
        out = out
            .iter()
            .flat_map(|(prefix, len)| {
                terms.iter().filter(move |t| len + t.len() <= max).map(move |t| {
                    let mut v: Vec<OutputTerm> = prefix.clone();
                    v.push(t.clone());
                    (v, len + t.len())
                })
            })
            .collect();
    }
    out.into_iter().map(|(terms, _)| Candidate { terms }).collect()
}

/// Shorter verified candidates, if any: a cheap filter on the first states
/// of the universe, then the full check on the survivors.
fn shorter_verified(ir: &IrProgram, u: &Universe, len: usize) -> (usize, Vec<Candidate>) {
    if len == 0 {
        return (0, vec![]);
    }
    let p = Problem::new(ir, &Options::default().search_config());
    let outs = outputs(ir);
    let sample: Vec<(ProgramState, Vec<Seen>)> = (0..u.len().min(400))
        .map(|i| {
            let pre = u.state(i);
            let post = loopstream::heap::run(ir, &pre, loopstream::heap::DEFAULT_FUEL);
            let seen = observe(&post, &outs);
            (pre, seen)
        })
        .collect();
    let all = all_candidates(&p, len - 1);
    let (mut out, mut buf) = (u.blank(), Vec::new());
    let found = all
        .iter()
        .filter(|c| sample.iter().all(|(pre, seen)| &applied(c, &outs, pre, &mut out, &mut buf) == seen))
        .filter(|c| matches!(check_end_to_end(ir, u, c, &VerifyConfig::default()), Ok(Verdict::Pass)))
        .cloned()
        .collect();
    (all.len(), found)
}

struct Gate {
    results: Vec<(String, bool)>,
}

impl Gate {
    fn run(&mut self, name: &str, f: impl FnOnce() -> (bool, String)) {
        let t = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("{} {name}: {detail} [{:.1?}]", if ok { "PASS" } else { "FAIL" }, t.elapsed());
        self.results.push((name.to_string(), ok));
    }
}

#[test]
fn acceptance() {
    let opts = Options::default();
    let corpus = load_corpus(&opts);
    let by_name = |n: &str| corpus.iter().find(|f| f.name == n).unwrap_or_else(|| panic!("{n} missing"));
    let mut gate = Gate { results: Vec::new() };

    gate.run("worked examples", || {
        let expected = [
            ("doubled_positives_indexed.minij", "org.stream().filter(v -> v > 0).map(v -> 2 * v) => copy"),
            ("doubled_positives_continue.minij", "org.stream().map(v -> 2 * v).filter(v -> v > 0) => copy"),
            ("find_even.minij", "data.stream().filter(v -> v % 2 == 0).findFirst().orElse(null) => result"),
            ("filter_and_double.minij", "list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList"),
            ("remove_negatives.minij", "l.stream().filter(v -> v >= 0) => l"),
            ("sum_and_trim.minij", "p.stream().skip(l.size()) => p\nl.stream().reduce(0, Integer::sum) => sum"),
            ("selection_sort.minij", "l.stream().sorted() => l"),
        ];
        let mut bad = Vec::new();
        for (name, reference) in expected {
            let f = by_name(name);
            let r = &f.report;
            if r.outcome != Outcome::Refactored || f.elapsed > Duration::from_secs(60) {
                bad.push(format!("{name}: {:?} in {:?}", r.outcome, f.elapsed));
                continue;
            }
            let u = Universe::new(&f.ir, &Bounds::default());
            let want = parse(reference, &f.ir);
            let got = parse(r.pipeline_text.as_deref().unwrap(), &f.ir);
            let java = read_java(r.java_text.as_deref().unwrap(), &f.ir).unwrap();
            for (what, c) in [("pipeline", &got), ("java", &java)] {
                if let Some(i) = first_difference(&f.ir, &u, c, &want) {
                    bad.push(format!("{name}: {what} differs on {}", u.constructors(&u.state(i)).join("; ")));
                }
            }
        }
        (bad.is_empty(), if bad.is_empty() { "7 files equal to the reference refactorings".into() } else { bad.join(", ") })
    });

    gate.run("refinement trace", || {
        let f = by_name("filter_and_double.minij");
        let cfg = Options { use_ga: false, seed: 0, ..Options::default() }.search_config();
        let s = synthesize(&f.ir, &cfg);
        let outs = outputs(&f.ir);
        let (mut out, mut buf) = (ProgramState::new(0, 0, 0), Vec::new());
        let mut separated = |text: &str| {
            let c = parse(text, &f.ir);
            s.cex.entries().iter().any(|e| applied(&c, &outs, &e.pre, &mut out, &mut buf) != observe(&e.post, &outs))
        };
        let identity = separated("");
        let always = separated("list.stream().filter(v -> true).map(v -> 2 * v) => newList");
        let signs = ["v >= 0", "v != 0", "v < 0", "v <= 0", "v == 0"];
        let sign_hits: Vec<&str> =
            signs.iter().copied().filter(|p| separated(&format!("list.stream().filter(v -> {p}).map(v -> 2 * v) => newList"))).collect();
        let values: Vec<String> = s.cex.entries().iter().map(|e| format!("{:?}", e.pre.list(0).unwrap_or_default())).collect();
        let ok = identity && always && !sign_hits.is_empty();
        (ok, format!("cex lists {}; identity {identity}, true-filter {always}, sign-confused {sign_hits:?}", values.join(" ")))
    });

    gate.run("unsoundness detection", || {
        let t = Instant::now();
        let r = verify_source(
            "sum_and_trim.minij",
            &source("sum_and_trim.minij"),
            "sum-only",
            "l.stream().reduce(0, Integer::sum) => sum",
            &opts,
        )
        .unwrap();
        let cex = r.counterexample.as_ref().map(|c| c.constructors.join("; ")).unwrap_or_default();
        let p_nonempty = cex.contains("add h p ");
        let ok = r.verdict == VerifyVerdict::Fail && p_nonempty && t.elapsed() < Duration::from_secs(5);
        (ok, format!("{:?} on {cex}", r.verdict))
    });

    gate.run("minimality", || {
        let mut bad = Vec::new();
        let mut checked = 0;
        for f in corpus.iter().filter(|f| f.report.outcome == Outcome::Refactored) {
            let u = Universe::new(&f.ir, &Bounds::default());
            let c = parse(f.report.pipeline_text.as_deref().unwrap(), &f.ir);
            let (n, found) = shorter_verified(&f.ir, &u, c.len());
            checked += n;
            if let Some(c2) = found.first() {
                bad.push(format!("{}: {} is shorter", f.name, c2.to_text(&outputs(&f.ir), &list_names(&f.ir))));
            }
        }
        (bad.is_empty(), if bad.is_empty() { format!("{checked} shorter candidates, none verified") } else { bad.join(", ") })
    });

    gate.run("baseline gap", || {
        let a = by_name("doubled_positives_indexed.minij");
        let b = by_name("doubled_positives_continue.minij");
        let baseline_ok = a.report.baseline == Some(loopstream_cli::BaselineOutcome::Rewritten)
            && b.report.baseline == Some(loopstream_cli::BaselineOutcome::NoMatch);
        let both = a.report.outcome == Outcome::Refactored && b.report.outcome == Outcome::Refactored;
        let same = both && {
            let u = Universe::new(&a.ir, &Bounds::default());
            let ca = parse(a.report.pipeline_text.as_deref().unwrap(), &a.ir);
            let cb = parse(b.report.pipeline_text.as_deref().unwrap(), &a.ir);
            first_difference(&a.ir, &u, &ca, &cb).is_none()
        };
        let semantic = corpus.iter().filter(|f| f.report.outcome == Outcome::Refactored).count();
        let baseline = corpus.iter().filter(|f| f.report.baseline == Some(loopstream_cli::BaselineOutcome::Rewritten)).count();
        let union = corpus
            .iter()
            .filter(|f| f.report.outcome == Outcome::Refactored || f.report.baseline == Some(loopstream_cli::BaselineOutcome::Rewritten))
            .count();
        let ok = baseline_ok && same && union >= semantic;
        (ok, format!("baseline rewrites indexed loop {baseline_ok}, engine outputs equal {same}; engine {semantic}, baseline {baseline}, combined {union} of {}", corpus.len()))
    });

    gate.run("jst oracle suite", || {
        let t = Instant::now();
        let per_opcode = jst_model::sweep();
        let n: u64 = per_opcode.values().sum();
        let ok = per_opcode.len() == 22 && t.elapsed() < Duration::from_secs(120);
        (ok, format!("{} opcodes, {n} checks, 0 mismatches", per_opcode.len()))
    });

    gate.run("heap equivalence laws", || {
        let mut runner = TestRunner::new(Config { cases: 10_000, failure_persistence: None, ..Config::default() });
        let pairs = proptest::strategy::Strategy::prop_flat_map(1..=3usize, |n| {
            (heap_gen::desc(n), heap_gen::desc(n), proptest::bool::ANY, proptest::num::u64::ANY, proptest::num::u64::ANY)
        });
        let laws = runner.run(&pairs, |(a, b, same, s1, s2)| {
            let b = if same { a.clone() } else { b };
            heap_gen::check_pair(&a, &b, s1, s2).map_err(TestCaseError::fail)?;
            heap_gen::check_triple([&a, &a, &b], [s1, s2, s1 ^ s2]).map_err(TestCaseError::fail)
        });
        match laws {
            Ok(()) => (true, "10000 pairs, 0 violations".into()),
            Err(e) => (false, e.to_string()),
        }
    });

    gate.run("vc consistency", || {
        let inv = Options { mode: ModeArg::Invariants, ..Options::default() };
        let mut bad = Vec::new();
        let mut n = 0;
        for f in corpus.iter().filter(|f| f.report.outcome == Outcome::Refactored) {
            n += 1;
            let r = refactor_source(&f.name, &source(&f.name), &inv).unwrap();
            if r.outcome != Outcome::Refactored {
                bad.push(format!("{}: {:?} {:?}", f.name, r.outcome, r.reason));
            }
        }
        (bad.is_empty(), if bad.is_empty() { format!("{n} corpus successes pass with invariants") } else { bad.join(", ") })
    });

    let failed: Vec<&str> = gate.results.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
