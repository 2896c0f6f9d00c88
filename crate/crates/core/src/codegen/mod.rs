//! Java 8 stream source for a verified candidate.
//!
//! Declared outputs are initialized from their pipeline. A list parameter
//! that changes is updated in place, never rebound, so aliases see the
//! change:
//!
//! ```text
//! List<Integer> copy = new ArrayList<>(l);
//! l.clear();
//! copy.stream().filter(v -> v >= 0).forEachOrdered(l::add);
//! ```

mod baseline;
mod reader;

pub use baseline::{emit_pattern_baseline, Baseline};
pub use reader::{read_java, ReadError};

use crate::frontend::ast::Program;
use crate::frontend::ir::{Initial, IrProgram, Value};
use crate::jst::{Count, OutputTerm, Pipeline, Stage, Terminal};
use crate::vcgen::{list_names, outputs, Candidate, OutputVar};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodegenError {
    #[error("no translation for {0}")]
    UntranslatableOp(String),
    #[error("candidate does not fit the method: {0}")]
    Shape(String),
}

/// How one output is written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub target: String,
    /// Statements, without indentation.
    pub lines: Vec<String>,
    /// Updated through `clear`/`add` rather than assigned.
    pub in_place: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitPlan {
    /// Copies of lists that are read after they change.
    pub preamble: Vec<String>,
    /// Outputs that are assigned come first, then in-place updates, so
    /// every read sees the pre-state.
    pub records: Vec<Emission>,
    pub imports: BTreeSet<&'static str>,
}

/// Picks names that clash with nothing in `taken` and records them.
struct Fresh {
    taken: BTreeSet<String>,
}

impl Fresh {
    fn pick(&mut self, wanted: &[String]) -> String {
        let base = wanted.first().cloned().unwrap_or_else(|| "x".into());
        let name = wanted
            .iter()
            .find(|w| !self.taken.contains(*w))
            .cloned()
            .unwrap_or_else(|| (2..).map(|i| format!("{base}{i}")).find(|n| !self.taken.contains(n)).expect("unbounded"));
        self.taken.insert(name.clone());
        name
    }
}

/// Replaces identifier `from` by `to`, leaving longer identifiers and
/// member names alone.
pub(crate) fn rename_ident(text: &str, from: &str, to: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let is_id = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    let mut i = 0;
    while i < bytes.len() {
        if is_id(bytes[i]) && (i == 0 || !is_id(bytes[i - 1])) {
            let start = i;
            while i < bytes.len() && is_id(bytes[i]) {
                i += 1;
            }
            let word = &text[start..i];
            let member = start > 0 && bytes[start - 1] == b'.';
            out.push_str(if word == from && !member { to } else { word });
        } else {
            out.push(bytes[i] as char);
            i += 1;
        }
    }
    out
}

struct Printer<'a> {
    /// List name per reference slot, with copies substituted.
    names: Vec<String>,
    params: &'a BTreeSet<usize>,
    var: String,
    acc: (String, String),
}

impl Printer<'_> {
    fn lambda(&self, text: String) -> String {
        rename_ident(&text, "v", &self.var)
    }

    fn count(&self, c: Count) -> Result<String, CodegenError> {
        match c {
            Count::Lit(n) => Ok(n.to_string()),
            Count::SizeOf(s) if self.params.contains(&s) => Ok(format!("{}.size()", self.names[s])),
            Count::SizeOf(s) => Err(CodegenError::UntranslatableOp(format!("size of list slot {s}"))),
        }
    }

    fn pipeline(&self, p: &Pipeline) -> Result<String, CodegenError> {
        if !self.params.contains(&p.source) {
            return Err(CodegenError::UntranslatableOp(format!("stream over list slot {}", p.source)));
        }
        let mut s = format!("{}.stream()", self.names[p.source]);
        for st in &p.stages {
            s.push_str(&match st {
                Stage::Filter(pr) => format!(".filter({})", self.lambda(pr.to_string())),
                Stage::Map(m) => format!(".map({})", self.lambda(m.to_string())),
                Stage::Sorted => ".sorted()".into(),
                Stage::Skip(c) => format!(".skip({})", self.count(*c)?),
                Stage::Limit(c) => format!(".limit({})", self.count(*c)?),
            });
        }
        Ok(s)
    }

    fn terminal(&self, t: &Terminal) -> String {
        match t {
            Terminal::Reduce { identity, op } => {
                let op = match op {
                    crate::jst::AccOp::Mul => format!("({a}, {b}) -> {a} * {b}", a = self.acc.0, b = self.acc.1),
                    other => other.to_string(),
                };
                format!(".reduce({identity}, {op})")
            }
            Terminal::AllMatch(p) => format!(".allMatch({})", self.lambda(p.to_string())),
            Terminal::AnyMatch(p) => format!(".anyMatch({})", self.lambda(p.to_string())),
            other => crate::jst::terminal_text(other),
        }
    }
}

fn literal(v: Value) -> String {
    v.to_string()
}

fn declaration(o: &OutputVar) -> String {
    match &o.initial {
        Some(Initial::EmptyList) => format!("{} {} = new ArrayList<>()", o.ty, o.name),
        Some(Initial::Scalar(v)) => format!("{} {} = {}", o.ty, o.name, literal(*v)),
        None if o.is_list() => format!("{} {} = new ArrayList<>()", o.ty, o.name),
        None => format!("{} {}", o.ty, o.name),
    }
}

/// Lays out the statements for `c`.
pub fn plan(c: &Candidate, ir: &IrProgram) -> Result<EmitPlan, CodegenError> {
    let outs = outputs(ir);
    if outs.len() != c.terms.len() {
        return Err(CodegenError::Shape(format!("{} terms for {} outputs", c.terms.len(), outs.len())));
    }
    let names = list_names(ir);
    let params: BTreeSet<usize> = ir.list_params().map(|v| ir.var(v).slot).collect();
    let mut imports = BTreeSet::new();
    if !params.is_empty() || outs.iter().any(OutputVar::is_list) {
        imports.insert("java.util.List");
    }
    // Identifiers visible in the emitted body.
    let mut fresh = Fresh { taken: ir.params.iter().chain(&ir.outputs).map(|&v| ir.var(v).name.clone()).collect() };

    let in_place = |o: &OutputVar, t: &OutputTerm| o.param && !matches!(t, OutputTerm::Unchanged);
    // Lists changed in place, and lists an in-place update reads once
    // an update at or before it has changed them.
    let mut changed = BTreeSet::new();
    let mut stale = BTreeSet::new();
    for (t, o) in c.terms.iter().zip(&outs) {
        if !in_place(o, t) {
            continue;
        }
        changed.insert(o.slot);
        if let Some(p) = t.pipeline() {
            let mut reads = vec![p.source];
            reads.extend(p.stages.iter().filter_map(|s| match s {
                Stage::Skip(Count::SizeOf(x)) | Stage::Limit(Count::SizeOf(x)) => Some(*x),
                _ => None,
            }));
            stale.extend(reads.into_iter().filter(|r| changed.contains(r)));
        }
    }
    let var = fresh.pick(&["v".into(), "e".into(), "x".into()]);
    let acc = (fresh.pick(&["a".into()]), fresh.pick(&["b".into()]));
    let mut preamble = Vec::new();
    let mut copied = names.clone();
    for &s in &stale {
        let wanted = if stale.len() == 1 { vec!["copy".into(), format!("{}Copy", names[s])] } else { vec![format!("{}Copy", names[s])] };
        let copy = fresh.pick(&wanted);
        preamble.push(format!("List<Integer> {copy} = new ArrayList<>({})", names[s]));
        imports.insert("java.util.ArrayList");
        copied[s] = copy;
    }
    let before = Printer { names: names.clone(), params: &params, var: var.clone(), acc: acc.clone() };
    let after = Printer { names: copied, params: &params, var, acc };

    let mut assigned = Vec::new();
    let mut updates = Vec::new();
    for (t, o) in c.terms.iter().zip(&outs) {
        let target = o.name.clone();
        if in_place(o, t) {
            let lines = match t {
                OutputTerm::Replace(p) => {
                    vec![format!("{target}.clear()"), format!("{}.forEachOrdered({target}::add)", after.pipeline(p)?)]
                }
                OutputTerm::Append(p) => vec![format!("{}.forEachOrdered({target}::add)", after.pipeline(p)?)],
                OutputTerm::AddLast(k) => vec![format!("{target}.add({k})")],
                OutputTerm::Scalar(..) | OutputTerm::Unchanged => {
                    return Err(CodegenError::Shape(format!("`{target}` is a list parameter")));
                }
            };
            updates.push(Emission { target, lines, in_place: true });
            continue;
        }
        if o.param {
            continue;
        }
        let lines = match t {
            OutputTerm::Unchanged => {
                if o.is_list() {
                    imports.insert("java.util.ArrayList");
                }
                vec![declaration(o)]
            }
            OutputTerm::Replace(p) | OutputTerm::Append(p) => {
                imports.insert("static java.util.stream.Collectors.toList");
                vec![format!("{} {target} = {}.collect(toList())", o.ty, before.pipeline(p)?)]
            }
            OutputTerm::AddLast(k) => {
                imports.insert("java.util.ArrayList");
                vec![declaration(o), format!("{target}.add({k})")]
            }
            OutputTerm::Scalar(p, term) => {
                let body = format!("{}{}", before.pipeline(p)?, before.terminal(term));
                match term {
                    Terminal::Count => vec![format!("{} {target} = (int) {body}", o.ty)],
                    _ => vec![format!("{} {target} = {body}", o.ty)],
                }
            }
        };
        assigned.push(Emission { target, lines, in_place: false });
    }
    assigned.extend(updates);
    Ok(EmitPlan { preamble, records: assigned, imports })
}

/// The refactored method: an import comment header, then the method with
/// its original signature and a new body.
pub fn emit(c: &Candidate, ir: &IrProgram, program: &Program) -> Result<String, CodegenError> {
    let plan = plan(c, ir)?;
    let mut out = String::new();
    for i in &plan.imports {
        out.push_str(&format!("// import {i};\n"));
    }
    let params: Vec<String> = program.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    out.push_str(&format!("void {}({}) {{\n", program.name, params.join(", ")));
    for line in plan.preamble.iter().chain(plan.records.iter().flat_map(|r| &r.lines)) {
        out.push_str(&format!("  {line};\n"));
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::heap::{Bounds, Universe};
    use crate::vcgen::{check_end_to_end, Verdict, VerifyConfig};

    fn corpus(name: &str) -> (Program, IrProgram) {
        let path = format!("{}/../../corpus/{name}.minij", env!("CARGO_MANIFEST_DIR"));
        compile(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn emit_text(name: &str, pipeline: &str) -> String {
        let (ast, ir) = corpus(name);
        let c = Candidate::parse(pipeline, &outputs(&ir), &list_names(&ir)).unwrap();
        let java = emit(&c, &ir, &ast).unwrap();
        assert_eq!(read_java(&java, &ir).unwrap(), c, "{java}");
        assert_eq!(emit(&c, &ir, &ast).unwrap(), java);
        java
    }

    #[test]
    fn in_place_filter() {
        let java = emit_text("remove_negatives", "l.stream().filter(v -> v >= 0) => l");
        assert_eq!(
            java,
            "// import java.util.ArrayList;\n// import java.util.List;\nvoid removeNeg(List<Integer> l) {\n  \
             List<Integer> copy = new ArrayList<>(l);\n  l.clear();\n  copy.stream().filter(v -> v >= 0).forEachOrdered(l::add);\n}\n"
        );
    }

    #[test]
    fn fresh_list_is_collected() {
        let java = emit_text("filter_and_double", "list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList");
        assert!(java.contains("  List<Integer> newList = list.stream().filter(v -> v > 0).map(v -> 2 * v).collect(toList());\n"), "{java}");
        assert!(java.contains("// import static java.util.stream.Collectors.toList;"));
    }

    #[test]
    fn sum_and_skip() {
        let java = emit_text("sum_and_trim", "p.stream().skip(l.size()) => p\nl.stream().reduce(0, Integer::sum) => sum");
        let body: Vec<&str> = java.lines().filter(|l| l.starts_with("  ")).map(str::trim).collect();
        assert_eq!(
            body,
            vec![
                "List<Integer> copy = new ArrayList<>(p);",
                "int sum = l.stream().reduce(0, Integer::sum);",
                "p.clear();",
                "copy.stream().skip(l.size()).forEachOrdered(p::add);",
            ]
        );
    }

    #[test]
    fn find_first_and_terminals() {
        let java = emit_text("find_even", "data.stream().filter(v -> v % 2 == 0).findFirst().orElse(null) => result");
        assert!(java.contains("Integer result = data.stream().filter(v -> v % 2 == 0).findFirst().orElse(null);"));
        emit_text("variant_max", "l.stream().max(Integer::compare).orElse(0) => m");
        emit_text("variant_max", "l.stream().filter(v -> v > 1).count() => m");
    }

    #[test]
    fn lambda_variable_avoids_program_names() {
        let (ast, ir) = compile("void f(List<Integer> v) { int s = 0; for (int x : v) s += x * 2; }").unwrap();
        let c = Candidate::parse("v.stream().map(v -> 2 * v).reduce(0, Integer::sum) => s", &outputs(&ir), &list_names(&ir)).unwrap();
        let java = emit(&c, &ir, &ast).unwrap();
        assert!(java.contains("int s = v.stream().map(e -> 2 * e).reduce(0, Integer::sum);"), "{java}");
        assert_eq!(read_java(&java, &ir).unwrap(), c);
    }

    #[test]
    fn emitted_text_reverifies() {
        let (ast, ir) = corpus("filter_and_double");
        let c = Candidate::parse("list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList", &outputs(&ir), &list_names(&ir)).unwrap();
        let back = read_java(&emit(&c, &ir, &ast).unwrap(), &ir).unwrap();
        let u = Universe::new(&ir, &Bounds::new(3, -2, 2));
        assert_eq!(check_end_to_end(&ir, &u, &back, &VerifyConfig::default()).unwrap(), Verdict::Pass);
    }

    #[test]
    fn baseline_templates() {
        let Baseline::Rewritten(java) = emit_pattern_baseline(&corpus("doubled_positives_indexed").0) else { panic!() };
        assert!(java.contains("org.stream().filter(v -> v > 0).map(v -> 2 * v).forEachOrdered(copy::add);"), "{java}");
        assert_eq!(emit_pattern_baseline(&corpus("doubled_positives_continue").0), Baseline::NoMatch);
        let Baseline::Rewritten(java) = emit_pattern_baseline(&corpus("remove_negatives").0) else { panic!() };
        assert!(java.contains("copy.stream().filter(v -> !(v < 0)).forEachOrdered(l::add);"), "{java}");
        let Baseline::Rewritten(java) = emit_pattern_baseline(&corpus("filter_and_double").0) else { panic!() };
        assert!(java.contains("list.stream().filter(v -> v > 0).map(v -> 2 * v).forEachOrdered(newList::add);"), "{java}");
        let (ast, _) = compile("void f(List<Integer> l) { for (int x : l) { } }").unwrap();
        assert_eq!(emit_pattern_baseline(&ast), Baseline::NoMatch);
    }

    #[test]
    fn rename_leaves_members_and_longer_names() {
        assert_eq!(rename_ident("v -> v.size() + vv + x.v", "v", "e"), "e -> e.size() + vv + x.v");
    }
}
