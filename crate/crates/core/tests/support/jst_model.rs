//! Every heap operation against a plain-vector model, over all heaps with
//! two list names (distinct or aliased), lists of length at most 3 with
//! values in -2..=2, and an iterator at every position of the first list.
//! Mismatches panic with the operation and the model state.

use loopstream::heap::{Heap, NIL};
use loopstream::jst::ops::{eval_op, Binding, End, Env, JstOp, Operand, Slot, NEG_INF, POS_INF};
use loopstream::jst::{AccOp, Atom, CmpOp, JstError, Mapper, Pred};
use std::collections::BTreeMap;

const A: Slot = 0;
const B: Slot = 1;
const IT: Slot = 2;
const OUT: Slot = 5;

/// Lists by value; slots 0 and 1 name lists, slot 2 is an iterator.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Model {
    lists: Vec<Vec<i32>>,
    names: [usize; 2],
    it: (usize, usize),
}

type Pos = Option<(usize, usize)>;

impl Model {
    fn norm(&self, l: usize, i: usize) -> Pos {
        (i < self.lists[l].len()).then_some((l, i))
    }

    fn pos(&self, s: Slot) -> Pos {
        match s {
            A | B => self.norm(self.names[s], 0),
            _ => self.norm(self.it.0, self.it.1),
        }
    }

    fn end(&self, y: End) -> Pos {
        y.and_then(|s| self.pos(s))
    }

    /// `(list, from, to)` for `[x, y)`.
    fn seg(&self, x: Slot, y: End) -> Result<Option<(usize, usize, usize)>, JstError> {
        match (self.pos(x), self.end(y)) {
            (None, None) => Ok(None),
            (Some((l, i)), None) => Ok(Some((l, i, self.lists[l].len()))),
            (None, Some(_)) => Err(JstError::IllFormedSegment),
            (Some((l, i)), Some((m, j))) if l == m && i <= j => Ok(Some((l, i, j))),
            _ => Err(JstError::IllFormedSegment),
        }
    }

    fn values(&self, x: Slot, y: End) -> Result<Vec<i32>, JstError> {
        Ok(self.seg(x, y)?.map_or(Vec::new(), |(l, i, j)| self.lists[l][i..j].to_vec()))
    }

    fn suffix(&self, s: Slot) -> Vec<i32> {
        self.pos(s).map_or(Vec::new(), |(l, i)| self.lists[l][i..].to_vec())
    }

    /// Deletes element `i` of list `l`; names at it move to the successor.
    fn delete(&mut self, l: usize, i: usize) {
        self.lists[l].remove(i);
        if self.it.0 == l && self.it.1 > i {
            self.it.1 -= 1;
        }
    }

    fn insert(&mut self, l: usize, i: usize, v: i32) {
        self.lists[l].insert(i, v);
        // The iterator holds a node (or the end), so it follows its element.
        if self.it.0 == l && self.it.1 >= i {
            self.it.1 += 1;
        }
    }
}

fn build(m: &Model) -> (Heap, Env) {
    let mut h = Heap::with_refs(2);
    let headers: Vec<u32> = m.lists.iter().map(|l| h.new_list(l)).collect();
    let mut env = Env::default();
    for s in [A, B] {
        h.refs[s] = headers[m.names[s]];
        env.bind(s, Binding::List(headers[m.names[s]]));
    }
    let it = h.node_at(headers[m.it.0], m.it.1).unwrap_or(NIL);
    env.bind(IT, Binding::Pos(it));
    (h, env)
}

fn node_of(h: &Heap, env: &Env, s: Slot) -> u32 {
    match env.get(s).unwrap() {
        Binding::List(l) => h.lists[l as usize].head,
        Binding::Pos(n) => n,
        b => panic!("slot {s} holds {b:?}"),
    }
}

fn suffix(h: &Heap, env: &Env, s: Slot) -> Vec<i32> {
    h.walk(node_of(h, env, s), NIL).map(|n| h.nodes[n as usize].value).collect()
}

fn ret_list(h: &Heap, env: &Env, s: Slot) -> Vec<i32> {
    match env.get(s).unwrap() {
        Binding::List(l) => h.to_vec(l),
        b => panic!("slot {s} holds {b:?}"),
    }
}

enum Expect {
    Scalar(Binding),
    List(Vec<i32>),
    /// The model after an in-place change.
    Mutated(Model),
}

struct Suite {
    heap: Heap,
    env: Env,
    per_opcode: BTreeMap<&'static str, u64>,
}

impl Suite {
    fn check(&mut self, m: &Model, op: JstOp, expect: Result<Expect, JstError>) {
        *self.per_opcode.entry(op.opcode()).or_default() += 1;
        let mut env = self.env.clone();
        let got = eval_op(&op, &self.heap, &mut env);
        let ctx = || format!("{op:?} on {m:?}");
        match (got, expect) {
            (Err(e), Err(want)) => assert_eq!(e, want, "{}", ctx()),
            (Ok(_), Err(want)) => panic!("{}: expected {want:?}", ctx()),
            (Err(e), Ok(_)) => panic!("{}: unexpected {e:?}", ctx()),
            (Ok((h2, r)), Ok(want)) => {
                let after = match want {
                    Expect::Scalar(b) => {
                        assert_eq!(r, Some(b), "{}", ctx());
                        m.clone()
                    }
                    Expect::List(vals) => {
                        assert_eq!(ret_list(&h2, &env, OUT), vals, "{}", ctx());
                        m.clone()
                    }
                    Expect::Mutated(m2) => m2,
                };
                for s in [A, B] {
                    assert_eq!(h2.to_vec(h2.refs[s]), after.lists[after.names[s]], "{} slot {s}", ctx());
                }
                assert_eq!(suffix(&h2, &env, IT), after.suffix(IT), "{} iterator", ctx());
            }
        }
    }
}

fn all_lists() -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..3 {
        let mut next = Vec::new();
        for l in &frontier {
            for v in -2..=2 {
                let mut l2: Vec<i32> = l.clone();
                l2.push(v);
                next.push(l2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn preds() -> Vec<(Pred, fn(i32) -> bool)> {
    vec![
        (Pred::True, |_| true),
        (Pred::One(Atom::Cmp(CmpOp::Gt, 0)), |v| v > 0),
        (Pred::One(Atom::Cmp(CmpOp::Le, -1)), |v| v <= -1),
        (Pred::One(Atom::Mod { k: 2, r: 0, eq: true }), |v| v % 2 == 0),
        (Pred::Both(Atom::Cmp(CmpOp::Ne, 0), Atom::Cmp(CmpOp::Lt, 2)), |v| v != 0 && v < 2),
    ]
}

fn acc(f: AccOp, a: i32, b: i32) -> i32 {
    match f {
        AccOp::Add => a + b,
        AccOp::Mul => a * b,
        AccOp::Min => a.min(b),
        AccOp::Max => a.max(b),
    }
}

fn run_state(s: &mut Suite, m: &Model) {
    (s.heap, s.env) = build(m);
    let slots = [A, B, IT];
    let ends: [End; 4] = [None, Some(A), Some(B), Some(IT)];
    let segs: Vec<(Slot, End)> = slots.iter().flat_map(|&x| ends.iter().map(move |&y| (x, y))).collect();
    let oob = |i: i64| Err(JstError::IndexOutOfRange(i));

    for &(x, y) in &segs {
        s.check(m, JstOp::Alias { x, y, out: OUT }, Ok(Expect::Scalar(Binding::Bool(m.pos(x) == m.end(y)))));
        let vals = m.values(x, y);
        s.check(m, JstOp::Size { x, y, out: OUT }, vals.clone().map(|v| Expect::Scalar(Binding::Int(v.len() as i64))));
        for (p, f) in preds() {
            let e = vals.clone().map(|v| Expect::Scalar(Binding::Bool(v.iter().any(|&x| f(x)))));
            s.check(m, JstOp::Exists { x, y, p, out: OUT }, e);
            let e = vals.clone().map(|v| Expect::Scalar(Binding::Bool(v.iter().all(|&x| f(x)))));
            s.check(m, JstOp::Forall { x, y, p, out: OUT }, e);
            let e = vals.clone().map(|v| Expect::List(v.into_iter().filter(|&x| f(x)).collect()));
            s.check(m, JstOp::Filter { x, y, p, ret: OUT }, e);
        }
        let e = vals.clone().map(|mut v| {
            v.sort();
            Expect::List(v)
        });
        s.check(m, JstOp::Sorted { x, y, ret: OUT }, e);
        let e = vals.clone().map(|v| Expect::Scalar(Binding::Int(v.iter().map(|&x| x as i64).min().unwrap_or(POS_INF))));
        s.check(m, JstOp::Min { x, y, out: OUT }, e);
        let e = vals.clone().map(|v| Expect::Scalar(Binding::Int(v.iter().map(|&x| x as i64).max().unwrap_or(NEG_INF))));
        s.check(m, JstOp::Max { x, y, out: OUT }, e);
        for (a, b) in [(2, 0), (1, -1), (-1, 0), (0, 3)] {
            let e = vals.clone().map(|v| Expect::List(v.iter().map(|&x| a * x + b).collect()));
            s.check(m, JstOp::Map { x, y, f: Mapper { a, b }, ret: OUT }, e);
        }
        for n in -1..=4i64 {
            let k = n.max(0) as usize;
            let e = vals.clone().map(|v| Expect::List(v.iter().skip(k).copied().collect()));
            s.check(m, JstOp::Skip { x, y, n: Operand::Const(n), ret: OUT }, e);
            let e = vals.clone().map(|v| Expect::List(v.iter().take(k).copied().collect()));
            s.check(m, JstOp::Limit { x, y, n: Operand::Const(n), ret: OUT }, e);
        }
        for f in AccOp::ALL {
            for init in [0, 1] {
                // `f(x0, f(x1, ... f(xn, init)))`.
                let e = vals.clone().map(|v| Expect::Scalar(Binding::Int(v.iter().rev().fold(init, |r, &x| acc(f, x, r)) as i64)));
                s.check(m, JstOp::Reduce { x, y, v: Operand::Const(init as i64), f, out: OUT }, e);
            }
        }
        for (a, b) in [(A, None), (B, None), (IT, None), (A, Some(IT))] {
            let e = vals.clone().and_then(|v| {
                let w = m.values(a, b)?;
                Ok(Expect::List(v.into_iter().chain(w).collect()))
            });
            s.check(m, JstOp::Concat { x, y, a, b, ret: OUT }, e);
        }
        s.check(m, JstOp::Copy { x, y, ret: OUT }, vals.clone().map(Expect::List));
        for v in [-2, 0, 2] {
            let e = m.seg(x, y).map(|seg| {
                let mut m2 = m.clone();
                if let Some((l, i, j)) = seg {
                    if let Some(k) = m.lists[l][i..j].iter().position(|&e| e == v) {
                        m2.delete(l, i + k);
                    }
                }
                Expect::Mutated(m2)
            });
            s.check(m, JstOp::RemoveVal { x, y, v: Operand::Const(v as i64) }, e);
        }
    }

    for &x in &slots {
        let suffix = m.suffix(x);
        for i in -1..=4i64 {
            let b = usize::try_from(i).ok().and_then(|i| suffix.get(i)).map_or(Binding::Null, |&v| Binding::Int(v as i64));
            s.check(m, JstOp::Get { x, i: Operand::Const(i), out: OUT }, Ok(Expect::Scalar(b)));
        }
        let e = match m.pos(x) {
            None => oob(0),
            Some((l, i)) => {
                let mut m2 = m.clone();
                m2.delete(l, i);
                Ok(Expect::Mutated(m2))
            }
        };
        s.check(m, JstOp::Remove { x }, e);
    }

    for x in [A, B] {
        let l = m.names[x];
        let len = m.lists[l].len() as i64;
        for i in -1..=4i64 {
            for v in [-2, 2] {
                let e = if (0..=len).contains(&i) {
                    let mut m2 = m.clone();
                    m2.insert(l, i as usize, v);
                    Ok(Expect::Mutated(m2))
                } else {
                    oob(i)
                };
                s.check(m, JstOp::Add { x, i: Operand::Const(i), v: Operand::Const(v as i64) }, e);
                let e = if (0..len).contains(&i) {
                    let mut m2 = m.clone();
                    m2.lists[l][i as usize] = v;
                    Ok(Expect::Mutated(m2))
                } else {
                    oob(i)
                };
                s.check(m, JstOp::Set { x, i: Operand::Const(i), v: Operand::Const(v as i64) }, e);
            }
            let e = if (0..=len).contains(&i) { Ok(Expect::Mutated(m.clone())) } else { oob(i) };
            s.check(m, JstOp::GetIterator { x, i: Operand::Const(i), it: OUT }, e);
            if (0..=len).contains(&i) {
                // The new iterator sees the list from position i.
                let (h, mut env) = build(m);
                let (h2, _) = eval_op(&JstOp::GetIterator { x, i: Operand::Const(i), it: OUT }, &h, &mut env).unwrap();
                assert_eq!(suffix(&h2, &env, OUT), m.lists[l][i as usize..]);
            }
        }
        for v in [-2, 2] {
            let mut m2 = m.clone();
            m2.insert(l, m.lists[l].len(), v);
            s.check(m, JstOp::AddLast { x, v: Operand::Const(v as i64) }, Ok(Expect::Mutated(m2)));
        }
    }
    s.check(m, JstOp::New { x: OUT }, Ok(Expect::List(vec![])));
}

/// Runs the whole sweep; returns the check count per opcode.
pub fn sweep() -> BTreeMap<&'static str, u64> {
    let lists = all_lists();
    assert_eq!(lists.len(), 156);
    let mut suite = Suite { heap: Heap::default(), env: Env::default(), per_opcode: Default::default() };
    for a in &lists {
        // Two distinct lists, and both names on one list.
        let seconds = lists.iter().map(Some).chain([None]);
        for b in seconds {
            let (lists, names) = match b {
                Some(b) => (vec![a.clone(), b.clone()], [0, 1]),
                None => (vec![a.clone()], [0, 0]),
            };
            for k in 0..=a.len() {
                let m = Model { lists: lists.clone(), names, it: (0, k) };
                run_state(&mut suite, &m);
            }
        }
    }
    suite.per_opcode
}
