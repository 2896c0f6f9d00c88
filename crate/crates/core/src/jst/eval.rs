//! Evaluation of terms over value sequences read from a pre-state heap.

use super::{Count, Pipeline, Stage, Terminal};
use crate::frontend::ir::Value;
use crate::heap::Heap;

/// Evaluates as if only the first `len` elements of list `list` had been
/// processed so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cut {
    pub list: usize,
    pub len: usize,
}

impl Count {
    pub fn resolve(self, pre: &Heap, cut: Option<Cut>) -> usize {
        match self {
            Count::Lit(n) => n as usize,
            Count::SizeOf(slot) => match cut {
                Some(c) if c.list == slot => c.len,
                _ => pre.len(pre.refs[slot]),
            },
        }
    }
}

impl Stage {
    pub fn apply(self, buf: &mut Vec<i32>, pre: &Heap, cut: Option<Cut>) {
        match self {
            Stage::Filter(p) => buf.retain(|&v| p.holds(v)),
            Stage::Map(m) => buf.iter_mut().for_each(|v| *v = m.apply(*v)),
            Stage::Sorted => buf.sort_unstable(),
            Stage::Skip(n) => {
                let n = n.resolve(pre, cut).min(buf.len());
                buf.drain(..n);
            }
            Stage::Limit(n) => buf.truncate(n.resolve(pre, cut)),
        }
    }
}

impl Terminal {
    pub fn eval(self, xs: &[i32]) -> Value {
        match self {
            // Folds from the right, as the recursive definition does.
            Terminal::Reduce { identity, op } => Value::Int(xs.iter().rev().fold(identity, |acc, &v| op.apply(v, acc))),
            Terminal::Max { default } => xs.iter().max().map_or(default, |&m| Value::Int(m)),
            Terminal::Min { default } => xs.iter().min().map_or(default, |&m| Value::Int(m)),
            Terminal::FindFirst { default } => xs.first().map_or(default, |&v| Value::Int(v)),
            Terminal::AllMatch(p) => Value::Bool(xs.iter().all(|&v| p.holds(v))),
            Terminal::AnyMatch(p) => Value::Bool(xs.iter().any(|&v| p.holds(v))),
            Terminal::Count => Value::Int(xs.len() as i32),
        }
    }
}

/// Source elements of `slot` in `pre`, honoring a cut.
pub fn source_into(pre: &Heap, slot: usize, cut: Option<Cut>, buf: &mut Vec<i32>) {
    buf.clear();
    let h = pre.refs[slot];
    let limit = match cut {
        Some(c) if c.list == slot => c.len,
        _ => usize::MAX,
    };
    buf.extend(pre.values(h).take(limit));
}

impl Pipeline {
    /// The elements the pipeline produces, written to `buf`.
    pub fn eval_into(&self, pre: &Heap, cut: Option<Cut>, buf: &mut Vec<i32>) {
        source_into(pre, self.source, cut, buf);
        for s in &self.stages {
            s.apply(buf, pre, cut);
        }
    }

    pub fn eval(&self, pre: &Heap) -> Vec<i32> {
        let mut buf = Vec::new();
        self.eval_into(pre, None, &mut buf);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn heap(lists: &[&[i32]]) -> Heap {
        let mut h = Heap::with_refs(lists.len());
        for (i, l) in lists.iter().enumerate() {
            h.refs[i] = h.new_list(l);
        }
        h
    }

    #[test]
    fn filter_then_map() {
        let h = heap(&[&[1, -2, 3]]);
        let p = Pipeline {
            source: 0,
            stages: vec![Stage::Filter(Pred::One(Atom::Cmp(CmpOp::Gt, 0))), Stage::Map(Mapper { a: 2, b: 0 })],
        };
        assert_eq!(p.eval(&h), [2, 6]);
    }

    #[test]
    fn sum_and_skip_by_size() {
        let h = heap(&[&[1, 2, 3], &[9, 9, 9, 9]]);
        let sum = Terminal::Reduce { identity: 0, op: AccOp::Add };
        assert_eq!(sum.eval(&h.to_vec(h.refs[0])), Value::Int(6));
        let skip = Pipeline { source: 1, stages: vec![Stage::Skip(Count::SizeOf(0))] };
        assert_eq!(skip.eval(&h), [9]);
        let mut buf = Vec::new();
        skip.eval_into(&h, Some(Cut { list: 0, len: 1 }), &mut buf);
        assert_eq!(buf, [9, 9, 9]);
    }

    #[test]
    fn terminals_on_empty() {
        assert_eq!(Terminal::Max { default: Value::Null }.eval(&[]), Value::Null);
        assert_eq!(Terminal::FindFirst { default: Value::Int(-1) }.eval(&[]), Value::Int(-1));
        assert_eq!(Terminal::AllMatch(Pred::One(Atom::Cmp(CmpOp::Gt, 0))).eval(&[]), Value::Bool(true));
        assert_eq!(Terminal::AnyMatch(Pred::True).eval(&[]), Value::Bool(false));
        assert_eq!(Terminal::Reduce { identity: 0, op: AccOp::Max }.eval(&[-3, -1]), Value::Int(0));
    }
}
