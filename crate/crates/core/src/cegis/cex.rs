//! Collected counterexample inputs and the outputs the original code
//! produces on them.

use crate::frontend::ir::{Initial, Value};
use crate::heap::{ProgramState, Universe, NIL};
use crate::jst::OutputTerm;
use crate::vcgen::{Candidate, OutputVar};

/// Value of one output after running some code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Obs {
    List(Option<Vec<i32>>),
    Scalar(Value),
}

/// One counterexample input.
#[derive(Debug, Clone)]
pub struct CexEntry {
    pub pre: ProgramState,
    pub post: ProgramState,
    pub constructors: Vec<String>,
    /// Per output: the value a term starts from.
    pub base: Vec<Obs>,
    /// Per output: the value the original code produces.
    pub target: Vec<Obs>,
}

/// Ordered inputs without duplicates.
#[derive(Debug, Clone, Default)]
pub struct CexSet {
    entries: Vec<CexEntry>,
}

fn observe(st: &ProgramState, o: &OutputVar) -> Obs {
    if o.is_list() {
        let h = st.heap.refs[o.slot];
        Obs::List((h != NIL).then(|| st.heap.to_vec(h)))
    } else {
        Obs::Scalar(st.scalars[o.slot])
    }
}

fn start(pre: &ProgramState, o: &OutputVar) -> Obs {
    if o.param {
        return observe(pre, o);
    }
    if o.is_list() {
        Obs::List(Some(Vec::new()))
    } else {
        Obs::Scalar(match o.initial {
            Some(Initial::Scalar(v)) => v,
            _ => Value::Null,
        })
    }
}

impl CexSet {
    pub fn new() -> CexSet {
        CexSet::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CexEntry] {
        &self.entries
    }

    /// Adds pre-state `pre` with the original's result `post`. Returns
    /// false if an input with the same constructors is already present.
    pub fn insert(&mut self, u: &Universe, outs: &[OutputVar], pre: ProgramState, post: ProgramState) -> bool {
        let constructors = u.constructors(&pre);
        if self.entries.iter().any(|e| e.constructors == constructors) {
            return false;
        }
        let base = outs.iter().map(|o| start(&pre, o)).collect();
        let target = outs.iter().map(|o| observe(&post, o)).collect();
        self.entries.push(CexEntry { pre, post, constructors, base, target });
        true
    }

    /// Whether `c` produces the original's output values on entry `i`.
    pub fn agrees(&self, i: usize, c: &Candidate, outs: &[OutputVar], buf: &mut Vec<i32>) -> bool {
        let e = &self.entries[i];
        c.terms.iter().zip(outs).enumerate().all(|(k, (t, o))| term_obs(t, o, e, k, buf) == e.target[k])
    }

    /// Number of entries on which `c` agrees.
    pub fn score(&self, c: &Candidate, outs: &[OutputVar], buf: &mut Vec<i32>) -> usize {
        (0..self.len()).filter(|&i| self.agrees(i, c, outs, buf)).count()
    }

    pub fn consistent(&self, c: &Candidate, outs: &[OutputVar]) -> bool {
        let mut buf = Vec::new();
        (0..self.len()).all(|i| self.agrees(i, c, outs, &mut buf))
    }
}

/// Value of output `k` under term `t` on entry `e`.
pub fn term_obs(t: &OutputTerm, o: &OutputVar, e: &CexEntry, k: usize, buf: &mut Vec<i32>) -> Obs {
    let base = || match &e.base[k] {
        Obs::List(Some(v)) => v.clone(),
        _ => Vec::new(),
    };
    match t {
        OutputTerm::Unchanged => e.base[k].clone(),
        OutputTerm::Replace(p) => {
            p.eval_into(&e.pre.heap, None, buf);
            Obs::List(Some(buf.clone()))
        }
        OutputTerm::Append(p) => {
            p.eval_into(&e.pre.heap, None, buf);
            let mut v = base();
            v.extend_from_slice(buf);
            Obs::List(Some(v))
        }
        OutputTerm::AddLast(c) => {
            let mut v = base();
            v.push(*c);
            Obs::List(Some(v))
        }
        OutputTerm::Scalar(p, term) => {
            debug_assert!(!o.is_list());
            p.eval_into(&e.pre.heap, None, buf);
            Obs::Scalar(term.eval(buf))
        }
    }
}
