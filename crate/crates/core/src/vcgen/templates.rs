//! Loop invariant templates.
//!
//! The main template reads the candidate at a cut: after `k` elements of
//! the traversed list, every output equals its term evaluated on the
//! first `k` elements, and the loop position matches `k`. The others
//! cover selection-style sorting, where the processed prefix is sorted
//! but the rest is permuted.

use super::candidate::{Candidate, OutputVar};
use crate::frontend::ast::Type;
use crate::frontend::ir::{IrProgram, LoopRecord, Traversal, Value};
use crate::heap::{state_equiv, EquivSpec, ProgramState, NIL};
use crate::jst::{Cut, OutputTerm};
use serde::Serialize;

/// Where a loop stands in its list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Position {
    /// Cursor of the iterator in this slot.
    Iter(usize),
    /// Value of the int variable in this scalar slot.
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Invariant {
    /// The candidate holds on a prefix of `list` whose length matches `pos`.
    PrefixImage { list: usize, pos: Position },
    /// `list[..upto]` is sorted, no larger than the rest, and `list` is a
    /// permutation of its pre-state.
    SortedPrefix { list: usize, upto: usize },
    /// `list[idx] == min(list[lo..hi])` with `lo <= idx < hi`.
    SegmentMin { list: usize, lo: usize, idx: usize, hi: usize },
    SegmentMax { list: usize, lo: usize, idx: usize, hi: usize },
}

impl Invariant {
    /// Readable form using program names.
    pub fn describe(&self, ir: &IrProgram) -> String {
        let scalar = |s: usize| {
            ir.vars.iter().find(|v| v.ty.is_scalar() && v.slot == s).map_or("?", |v| v.name.as_str()).to_string()
        };
        let iter = |s: usize| ir.vars.iter().find(|v| v.ty == Type::Iterator && v.slot == s).map_or("?", |v| v.name.as_str()).to_string();
        match *self {
            Invariant::PrefixImage { list, pos } => {
                let p = match pos {
                    Position::Iter(s) => format!("{}.cursor", iter(s)),
                    Position::Index(s) => scalar(s),
                };
                format!("exists k. S_f(h_i with {} cut at k) && position {p} matches k", ir.list_name(list))
            }
            Invariant::SortedPrefix { list, upto } => {
                let (l, i) = (ir.list_name(list), scalar(upto));
                format!("sorted({l}[..{i}]) && max({l}[..{i}]) <= min({l}[{i}..]) && perm({l}, h_i.{l})")
            }
            Invariant::SegmentMin { list, lo, idx, hi } => {
                let l = ir.list_name(list);
                format!("{l}[{i}] == min({l}[{a}..{b}])", i = scalar(idx), a = scalar(lo), b = scalar(hi))
            }
            Invariant::SegmentMax { list, lo, idx, hi } => {
                let l = ir.list_name(list);
                format!("{l}[{i}] == max({l}[{a}..{b}])", i = scalar(idx), a = scalar(lo), b = scalar(hi))
            }
        }
    }
}

/// Templates for loop `l`, most specific first.
pub fn candidates(ir: &IrProgram, l: &LoopRecord, outs: &[OutputVar]) -> Vec<Invariant> {
    let mut v = Vec::new();
    match l.traversal {
        Traversal::Iter { iter, list } => {
            v.push(Invariant::PrefixImage { list: ir.var(list).slot, pos: Position::Iter(ir.var(iter).slot) })
        }
        Traversal::Index { var, list } => {
            v.push(Invariant::PrefixImage { list: ir.var(list).slot, pos: Position::Index(ir.var(var).slot) })
        }
        Traversal::Unknown => {}
    }
    let ints: Vec<usize> = l.scope.iter().map(|&x| ir.var(x)).filter(|x| x.ty == Type::Int).map(|x| x.slot).collect();
    for o in outs.iter().filter(|o| o.is_list() && o.param) {
        for &upto in &ints {
            v.push(Invariant::SortedPrefix { list: o.slot, upto });
        }
    }
    for o in outs.iter().filter(|o| o.is_list() && o.param) {
        for &lo in &ints {
            for &idx in &ints {
                for &hi in &ints {
                    if lo != idx && idx != hi && lo != hi {
                        v.push(Invariant::SegmentMin { list: o.slot, lo, idx, hi });
                        v.push(Invariant::SegmentMax { list: o.slot, lo, idx, hi });
                    }
                }
            }
        }
    }
    v
}

/// Reusable buffers for template evaluation.
#[derive(Debug, Clone)]
pub struct Scratch {
    pub expected: ProgramState,
    pub buf: Vec<i32>,
    pub a: Vec<i32>,
    pub b: Vec<i32>,
}

impl Scratch {
    pub fn new(blank: &ProgramState) -> Scratch {
        Scratch { expected: blank.clone(), buf: Vec::new(), a: Vec::new(), b: Vec::new() }
    }
}

fn int(st: &ProgramState, slot: usize) -> Option<i64> {
    match st.scalars[slot] {
        Value::Int(v) => Some(v as i64),
        _ => None,
    }
}

fn values_into(st: &ProgramState, list: usize, out: &mut Vec<i32>) -> bool {
    out.clear();
    let h = st.heap.refs[list];
    if h == NIL {
        return false;
    }
    out.extend(st.heap.values(h));
    true
}

pub struct Context<'a> {
    pub cand: &'a Candidate,
    pub outs: &'a [OutputVar],
    pub spec: &'a EquivSpec,
}

impl Invariant {
    /// Whether the invariant relates pre-state `pre` to loop state `cur`.
    pub fn holds(&self, cx: &Context<'_>, pre: &ProgramState, cur: &ProgramState, s: &mut Scratch) -> bool {
        match *self {
            Invariant::PrefixImage { list, pos } => {
                let n = match pre.heap.refs[list] {
                    NIL => return false,
                    h => pre.heap.len(h),
                };
                let p = match pos {
                    Position::Iter(slot) => match cur.iters[slot] {
                        Some(it) => it.cursor as i64,
                        None => return false,
                    },
                    Position::Index(slot) => match int(cur, slot) {
                        Some(p) => p,
                        None => return false,
                    },
                };
                // An in-place target that is also traversed shrinks or
                // grows behind the position.
                let in_place = cx.outs.iter().zip(&cx.cand.terms).find_map(|(o, t)| match t {
                    OutputTerm::Replace(pl) if o.is_list() && o.slot == list => Some(pl),
                    _ => None,
                });
                // An index past the end (a loop starting at 1 on an empty
                // list) has seen the whole list.
                let p = if in_place.is_none() { p.min(n as i64) } else { p };
                for k in 0..=n {
                    let cut = Some(Cut { list, len: k });
                    let at = match in_place {
                        Some(pl) => {
                            pl.eval_into(&pre.heap, cut, &mut s.buf);
                            s.buf.len() as i64
                        }
                        None => k as i64,
                    };
                    if at != p {
                        continue;
                    }
                    cx.cand.apply(cx.outs, pre, cut, &mut s.expected, &mut s.buf);
                    if state_equiv(cur, &s.expected, cx.spec) {
                        return true;
                    }
                }
                false
            }
            Invariant::SortedPrefix { list, upto } => {
                if !values_into(cur, list, &mut s.a) || !values_into(pre, list, &mut s.b) {
                    return false;
                }
                let n = s.a.len();
                let Some(i) = int(cur, upto).filter(|&i| i >= 0 && i as usize <= n) else {
                    return false;
                };
                let i = i as usize;
                let (head, tail) = s.a.split_at(i);
                if head.windows(2).any(|w| w[0] > w[1]) {
                    return false;
                }
                if let (Some(hi), Some(lo)) = (head.iter().max(), tail.iter().min()) {
                    if hi > lo {
                        return false;
                    }
                }
                s.a.sort_unstable();
                s.b.sort_unstable();
                s.a == s.b
            }
            Invariant::SegmentMin { list, lo, idx, hi } | Invariant::SegmentMax { list, lo, idx, hi } => {
                if !values_into(cur, list, &mut s.a) {
                    return false;
                }
                let (Some(lo), Some(idx), Some(hi)) = (int(cur, lo), int(cur, idx), int(cur, hi)) else {
                    return false;
                };
                if !(0 <= lo && lo <= idx && idx < hi && hi as usize <= s.a.len()) {
                    return false;
                }
                let seg = &s.a[lo as usize..hi as usize];
                let want = if matches!(self, Invariant::SegmentMin { .. }) { seg.iter().min() } else { seg.iter().max() };
                want == Some(&s.a[idx as usize])
            }
        }
    }
}
