//! Candidates: one term per output, and the post-state they denote.

use super::VcError;
use crate::frontend::ast::Type;
use crate::frontend::ir::{Initial, IrProgram, Value, VarId};
use crate::heap::ProgramState;
use crate::jst::{parse_term_line, Cut, OutputTerm, Terminal, TextError};

/// An output variable of the program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputVar {
    pub var: VarId,
    pub name: String,
    pub ty: Type,
    /// Reference slot for lists, scalar slot otherwise.
    pub slot: usize,
    /// A parameter keeps its pre-state value when unchanged; a declared
    /// output starts from `initial`.
    pub param: bool,
    pub initial: Option<Initial>,
}

impl OutputVar {
    pub fn is_list(&self) -> bool {
        self.ty == Type::List
    }
}

pub fn outputs(ir: &IrProgram) -> Vec<OutputVar> {
    ir.outputs
        .iter()
        .map(|&v| {
            let info = ir.var(v);
            OutputVar {
                var: v,
                name: info.name.clone(),
                ty: info.ty,
                slot: info.slot,
                param: ir.params.contains(&v),
                initial: info.initial.clone(),
            }
        })
        .collect()
}

/// Names of the program's list slots.
pub fn list_names(ir: &IrProgram) -> Vec<String> {
    (0..ir.n_lists).map(|s| ir.list_name(s).to_string()).collect()
}

/// One term per output, in output order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub terms: Vec<OutputTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CandidateError {
    #[error("line {line}: {source}")]
    Text { line: usize, source: TextError },
    #[error("line {line}: `{name}` is not an output of the method")]
    NotAnOutput { line: usize, name: String },
    #[error("line {line}: `{name}` is defined twice")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: {message}")]
    Kind { line: usize, message: String },
}

impl Candidate {
    /// Every output keeps its starting value.
    pub fn identity(n_outputs: usize) -> Candidate {
        Candidate { terms: vec![OutputTerm::Unchanged; n_outputs] }
    }

    /// Total stage and terminal count.
    pub fn len(&self) -> usize {
        self.terms.iter().map(OutputTerm::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pipeline text, one line per changed output.
    pub fn to_text(&self, outs: &[OutputVar], names: &[String]) -> String {
        let lines: Vec<String> = self.terms.iter().zip(outs).filter_map(|(t, o)| t.to_line(&o.name, names)).collect();
        if lines.is_empty() {
            "// no output changes".to_string()
        } else {
            lines.join("\n")
        }
    }

    /// Parses pipeline text; outputs without a line are unchanged. Blank
    /// lines and `//` comments are skipped.
    pub fn parse(text: &str, outs: &[OutputVar], names: &[String]) -> Result<Candidate, CandidateError> {
        let mut terms = vec![OutputTerm::Unchanged; outs.len()];
        let mut seen = vec![false; outs.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split("//").next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parsed = parse_term_line(body, names).map_err(|source| CandidateError::Text { line, source })?;
            let k = outs
                .iter()
                .position(|o| o.name == parsed.target)
                .ok_or_else(|| CandidateError::NotAnOutput { line, name: parsed.target.clone() })?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(CandidateError::Duplicate { line, name: parsed.target });
            }
            if let Err(message) = term_fits(&parsed.term, &outs[k]) {
                return Err(CandidateError::Kind { line, message });
            }
            terms[k] = parsed.term;
        }
        Ok(Candidate { terms })
    }

    pub(crate) fn check_shape(&self, ir: &IrProgram) -> Result<(), VcError> {
        let outs = outputs(ir);
        if outs.len() != self.terms.len() {
            return Err(VcError::ShapeMismatch(format!("{} terms for {} outputs", self.terms.len(), outs.len())));
        }
        for (t, o) in self.terms.iter().zip(&outs) {
            term_fits(t, o).map_err(VcError::ShapeMismatch)?;
            if let Some(p) = t.pipeline() {
                if p.source >= ir.n_lists || !ir.list_params().any(|v| ir.var(v).slot == p.source) {
                    return Err(VcError::ShapeMismatch(format!("`{}` reads a list that is not a parameter", o.name)));
                }
            }
        }
        Ok(())
    }

    /// Writes the state the candidate denotes for pre-state `pre` into
    /// `out`. With a cut, terms see only a prefix of the cut list, and an
    /// in-place target that is the cut list keeps its unprocessed suffix.
    pub fn apply(&self, outs: &[OutputVar], pre: &ProgramState, cut: Option<Cut>, out: &mut ProgramState, buf: &mut Vec<i32>) {
        out.clone_from(pre);
        for o in outs.iter().filter(|o| !o.param) {
            if o.is_list() {
                out.heap.refs[o.slot] = out.heap.new_list(&[]);
            } else {
                out.scalars[o.slot] = match o.initial {
                    Some(Initial::Scalar(v)) => v,
                    _ => Value::Null,
                };
            }
        }
        for (t, o) in self.terms.iter().zip(outs) {
            match t {
                OutputTerm::Unchanged => {}
                OutputTerm::Replace(p) => {
                    p.eval_into(&pre.heap, cut, buf);
                    if let Some(c) = cut.filter(|c| c.list == o.slot) {
                        buf.extend(pre.heap.values(pre.heap.refs[o.slot]).skip(c.len));
                    }
                    let h = out.heap.refs[o.slot];
                    out.heap.replace_contents(h, buf);
                }
                OutputTerm::Append(p) => {
                    p.eval_into(&pre.heap, cut, buf);
                    let h = out.heap.refs[o.slot];
                    for &v in buf.iter() {
                        out.heap.push(h, v);
                    }
                }
                OutputTerm::AddLast(c) => {
                    let h = out.heap.refs[o.slot];
                    out.heap.push(h, *c);
                }
                OutputTerm::Scalar(p, term) => {
                    p.eval_into(&pre.heap, cut, buf);
                    out.scalars[o.slot] = term.eval(buf);
                }
            }
        }
    }
}

/// Whether term `t` can define output `o`.
fn term_fits(t: &OutputTerm, o: &OutputVar) -> Result<(), String> {
    let ok = match t {
        OutputTerm::Unchanged => true,
        OutputTerm::Replace(_) | OutputTerm::Append(_) | OutputTerm::AddLast(_) => o.is_list(),
        OutputTerm::Scalar(_, term) => match term {
            Terminal::AllMatch(_) | Terminal::AnyMatch(_) => o.ty == Type::Boolean,
            Terminal::Reduce { .. } | Terminal::Count => matches!(o.ty, Type::Int | Type::Integer),
            Terminal::Max { default } | Terminal::Min { default } | Terminal::FindFirst { default } => match o.ty {
                Type::Int => matches!(default, Value::Int(_)),
                Type::Integer => !matches!(default, Value::Bool(_)),
                _ => false,
            },
        },
    };
    if ok {
        Ok(())
    } else {
        Err(format!("term does not produce a value of the type of `{}`", o.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::heap::{run, Bounds, Universe, DEFAULT_FUEL};

    #[test]
    fn apply_matches_run_for_the_known_refactoring() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/filter_and_double.minij")).unwrap();
        let (_, ir) = compile(&src).unwrap();
        let outs = outputs(&ir);
        let names = list_names(&ir);
        let text = "list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList";
        let c = Candidate::parse(text, &outs, &names).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.to_text(&outs, &names), text);
        let u = Universe::new(&ir, &Bounds::new(3, -2, 2));
        let (mut got, mut buf) = (u.blank(), Vec::new());
        for i in 0..u.len() {
            let pre = u.state(i);
            let want = run(&ir, &pre, DEFAULT_FUEL);
            c.apply(&outs, &pre, None, &mut got, &mut buf);
            assert!(crate::heap::state_equiv(&want, &got, &u.spec), "state {i}");
        }
    }

    #[test]
    fn parse_rejects_bad_targets() {
        let (_, ir) = compile("void f(List<Integer> l) { int s = 0; for (int x : l) s += x; }").unwrap();
        let outs = outputs(&ir);
        let names = list_names(&ir);
        assert!(matches!(Candidate::parse("l.stream() => q", &outs, &names), Err(CandidateError::NotAnOutput { .. })));
        assert!(matches!(Candidate::parse("l.stream().map(v -> 2 * v) => s", &outs, &names), Err(CandidateError::Kind { .. })));
        let c = Candidate::parse("// sum\nl.stream().reduce(0, Integer::sum) => s\n", &outs, &names).unwrap();
        assert_eq!(c.len(), 1);
    }
}
