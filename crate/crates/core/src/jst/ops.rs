//! Heap-level operations, defined by structural recursion over list
//! segments `[x, y)`.
//!
//! Every operation takes its input heap by reference and returns a new
//! heap. Constructive operations build their result by consing onto the
//! result of the recursive call on the rest of the segment.

use super::{AccOp, Count, JstError, Mapper, OutputTerm, Pipeline, Pred, Stage, Terminal};
use crate::frontend::ir::Value;
use crate::heap::{Heap, ListObj, Node, NIL};

pub type Slot = usize;

/// `+∞` and `-∞` for `min` and `max` of empty segments.
pub const POS_INF: i64 = i64::MAX;
pub const NEG_INF: i64 = i64::MIN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binding {
    /// A list object, by header.
    List(u32),
    /// A node position, as held by an iterator; `NIL` is past the end.
    Pos(u32),
    Int(i64),
    Bool(bool),
    Null,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub slots: Vec<Option<Binding>>,
}

impl Env {
    pub fn get(&self, s: Slot) -> Result<Binding, JstError> {
        self.slots.get(s).copied().flatten().ok_or(JstError::MissingBinding(s))
    }

    pub fn bind(&mut self, s: Slot, b: Binding) {
        if self.slots.len() <= s {
            self.slots.resize(s + 1, None);
        }
        self.slots[s] = Some(b);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Const(i64),
    Var(Slot),
}

/// Segment end: a bound name, or `null` for the end of the list.
pub type End = Option<Slot>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JstOp {
    Alias { x: Slot, y: End, out: Slot },
    Size { x: Slot, y: End, out: Slot },
    Get { x: Slot, i: Operand, out: Slot },
    Add { x: Slot, i: Operand, v: Operand },
    AddLast { x: Slot, v: Operand },
    Set { x: Slot, i: Operand, v: Operand },
    /// Removes the node at `x`; every name at that node moves to its successor.
    Remove { x: Slot },
    /// Removes the first node holding `v` in `[x, y)`.
    RemoveVal { x: Slot, y: End, v: Operand },
    Exists { x: Slot, y: End, p: Pred, out: Slot },
    Forall { x: Slot, y: End, p: Pred, out: Slot },
    Sorted { x: Slot, y: End, ret: Slot },
    Min { x: Slot, y: End, out: Slot },
    Max { x: Slot, y: End, out: Slot },
    Filter { x: Slot, y: End, p: Pred, ret: Slot },
    Map { x: Slot, y: End, f: Mapper, ret: Slot },
    Skip { x: Slot, y: End, n: Operand, ret: Slot },
    Limit { x: Slot, y: End, n: Operand, ret: Slot },
    Reduce { x: Slot, y: End, v: Operand, f: AccOp, out: Slot },
    Concat { x: Slot, y: End, a: Slot, b: End, ret: Slot },
    Copy { x: Slot, y: End, ret: Slot },
    New { x: Slot },
    GetIterator { x: Slot, i: Operand, it: Slot },
}

impl JstOp {
    pub fn opcode(&self) -> &'static str {
        match self {
            JstOp::Alias { .. } => "alias",
            JstOp::Size { .. } => "size",
            JstOp::Get { .. } => "get",
            JstOp::Add { .. } => "add",
            JstOp::AddLast { .. } => "add_last",
            JstOp::Set { .. } => "set",
            JstOp::Remove { .. } => "remove",
            JstOp::RemoveVal { .. } => "removeVal",
            JstOp::Exists { .. } => "exists",
            JstOp::Forall { .. } => "forall",
            JstOp::Sorted { .. } => "sorted",
            JstOp::Min { .. } => "min",
            JstOp::Max { .. } => "max",
            JstOp::Filter { .. } => "filter",
            JstOp::Map { .. } => "map",
            JstOp::Skip { .. } => "skip",
            JstOp::Limit { .. } => "limit",
            JstOp::Reduce { .. } => "reduce",
            JstOp::Concat { .. } => "concat",
            JstOp::Copy { .. } => "copy",
            JstOp::New { .. } => "new",
            JstOp::GetIterator { .. } => "getIterator",
        }
    }
}

type R<T> = Result<T, JstError>;

/// The node a name designates: a list's first node or an iterator position.
fn node(h: &Heap, env: &Env, s: Slot) -> R<u32> {
    match env.get(s)? {
        Binding::List(l) => Ok(h.lists[l as usize].head),
        Binding::Pos(n) => Ok(n),
        Binding::Null => Ok(NIL),
        _ => Err(JstError::WrongKind),
    }
}

fn end(h: &Heap, env: &Env, y: End) -> R<u32> {
    y.map_or(Ok(NIL), |s| node(h, env, s))
}

fn int(env: &Env, o: Operand) -> R<i64> {
    match o {
        Operand::Const(c) => Ok(c),
        Operand::Var(s) => match env.get(s)? {
            Binding::Int(i) => Ok(i),
            _ => Err(JstError::WrongKind),
        },
    }
}

fn value(env: &Env, o: Operand) -> R<i32> {
    let v = int(env, o)?;
    i32::try_from(v).map_err(|_| JstError::WrongKind)
}

fn list(env: &Env, s: Slot) -> R<u32> {
    match env.get(s)? {
        Binding::List(l) => Ok(l),
        _ => Err(JstError::WrongKind),
    }
}

/// Checks that `y` is reachable from `x`.
fn segment(h: &Heap, x: u32, y: u32) -> R<(u32, u32)> {
    let mut cur = x;
    while cur != y {
        if cur == NIL {
            return Err(JstError::IllFormedSegment);
        }
        cur = h.nodes[cur as usize].next;
    }
    Ok((x, y))
}

fn seg(h: &Heap, env: &Env, x: Slot, y: End) -> R<(u32, u32)> {
    segment(h, node(h, env, x)?, end(h, env, y)?)
}

fn val(h: &Heap, x: u32) -> i32 {
    h.nodes[x as usize].value
}

fn next(h: &Heap, x: u32) -> u32 {
    h.nodes[x as usize].next
}

/// Puts a fresh node holding `e` in front of `rest`.
fn add0(h: &mut Heap, e: i32, rest: u32) -> u32 {
    h.nodes.push(Node { value: e, next: rest });
    (h.nodes.len() - 1) as u32
}

fn new_header(h: &mut Heap, head: u32) -> u32 {
    h.lists.push(ListObj { head, mod_count: 0 });
    (h.lists.len() - 1) as u32
}

fn size(h: &Heap, x: u32, y: u32) -> i64 {
    if x == y {
        0
    } else {
        1 + size(h, next(h, x), y)
    }
}

fn get(h: &Heap, x: u32, i: i64) -> Binding {
    if x == NIL || i < 0 {
        Binding::Null
    } else if i == 0 {
        Binding::Int(val(h, x) as i64)
    } else {
        get(h, next(h, x), i - 1)
    }
}

fn max(h: &Heap, x: u32, y: u32) -> i64 {
    if x == y {
        NEG_INF
    } else {
        (val(h, x) as i64).max(max(h, next(h, x), y))
    }
}

fn min(h: &Heap, x: u32, y: u32) -> i64 {
    if x == y {
        POS_INF
    } else {
        (val(h, x) as i64).min(min(h, next(h, x), y))
    }
}

fn exists(h: &Heap, x: u32, y: u32, p: Pred) -> bool {
    x != y && (p.holds(val(h, x)) || exists(h, next(h, x), y, p))
}

fn forall(h: &Heap, x: u32, y: u32, p: Pred) -> bool {
    x == y || (p.holds(val(h, x)) && forall(h, next(h, x), y, p))
}

fn reduce(h: &Heap, x: u32, y: u32, v: i32, f: AccOp) -> i32 {
    if x == y {
        v
    } else {
        f.apply(val(h, x), reduce(h, next(h, x), y, v, f))
    }
}

/// Fresh nodes for `[x, y)`; returns the first.
fn copy(h: &mut Heap, x: u32, y: u32) -> u32 {
    if x == y {
        return NIL;
    }
    let rest = copy(h, next(h, x), y);
    let v = val(h, x);
    add0(h, v, rest)
}

fn map(h: &mut Heap, x: u32, y: u32, f: Mapper) -> u32 {
    if x == y {
        return NIL;
    }
    let rest = map(h, next(h, x), y, f);
    let v = f.apply(val(h, x));
    add0(h, v, rest)
}

fn filter(h: &mut Heap, x: u32, y: u32, p: Pred) -> u32 {
    if x == y {
        return NIL;
    }
    let rest = filter(h, next(h, x), y, p);
    let v = val(h, x);
    if p.holds(v) {
        add0(h, v, rest)
    } else {
        rest
    }
}

/// Drops `n` nodes, then shares the remainder. `done` counts the dropped
/// nodes and is not observable.
fn skip(h: &mut Heap, x: u32, y: u32, done: i64, n: i64) -> u32 {
    if x == y {
        NIL
    } else if n > 0 {
        skip(h, next(h, x), y, done + 1, n - 1)
    } else if y == NIL {
        x
    } else {
        // A bounded remainder cannot share its tail past `y`.
        copy(h, x, y)
    }
}

fn limit(h: &mut Heap, x: u32, y: u32, done: i64, n: i64) -> u32 {
    if x == y || n <= 0 {
        return NIL;
    }
    let rest = limit(h, next(h, x), y, done + 1, n - 1);
    let v = val(h, x);
    add0(h, v, rest)
}

/// Selection: the minimum goes first, then the sorted rest without it.
fn sorted(h: &mut Heap, x: u32, y: u32) -> u32 {
    if x == y {
        return NIL;
    }
    let m = min(h, x, y) as i32;
    // Work on a private copy so `removeVal` leaves `[x, y)` intact.
    let start = copy(h, x, y);
    let start = remove_val(h, start, NIL, m, &mut []);
    let rest = sorted(h, start, NIL);
    add0(h, m, rest)
}

/// Unlinks node `n`: every edge, header and position at `n` moves to its
/// successor.
fn unlink(h: &mut Heap, n: u32, positions: &mut [Option<Binding>]) -> u32 {
    let succ = next(h, n);
    for node in h.nodes.iter_mut() {
        if node.next == n {
            node.next = succ;
        }
    }
    for l in h.lists.iter_mut() {
        if l.head == n {
            l.head = succ;
            l.mod_count += 1;
        }
    }
    for b in positions.iter_mut() {
        if *b == Some(Binding::Pos(n)) {
            *b = Some(Binding::Pos(succ));
        }
    }
    succ
}

/// Removes the first node holding `v` in `[x, y)`; returns the new start.
fn remove_val(h: &mut Heap, x: u32, y: u32, v: i32, positions: &mut [Option<Binding>]) -> u32 {
    let mut cur = x;
    while cur != y {
        if val(h, cur) == v {
            let succ = unlink(h, cur, positions);
            return if cur == x { succ } else { x };
        }
        cur = next(h, cur);
    }
    x
}

/// Rebuilds list `l` with `e` inserted at `i` (or replacing position `i`).
fn splice(h: &mut Heap, l: u32, i: i64, e: i32, replace: bool) -> R<()> {
    let n = size(h, h.lists[l as usize].head, NIL);
    if i < 0 || i > n || (replace && i == n) {
        return Err(JstError::IndexOutOfRange(i));
    }
    let mut values = h.to_vec(l);
    if replace {
        values[i as usize] = e;
    } else {
        values.insert(i as usize, e);
    }
    if replace {
        // `set` changes a value, not the structure.
        let node = h.node_at(l, i as usize).expect("index checked");
        h.nodes[node as usize].value = e;
    } else {
        h.insert(l, i as usize, e);
    }
    debug_assert_eq!(h.to_vec(l), values);
    Ok(())
}

fn bind_new(h: &mut Heap, env: &mut Env, ret: Slot, head: u32) -> Option<Binding> {
    let b = Binding::List(new_header(h, head));
    env.bind(ret, b);
    Some(b)
}

/// Applies one operation. Scalar results are bound to the op's output
/// name and also returned.
pub fn eval_op(op: &JstOp, h0: &Heap, env: &mut Env) -> R<(Heap, Option<Binding>)> {
    let mut h = h0.clone();
    let out = match *op {
        JstOp::Alias { x, y, out } => {
            let b = Binding::Bool(node(&h, env, x)? == end(&h, env, y)?);
            env.bind(out, b);
            Some(b)
        }
        JstOp::Size { x, y, out } => {
            let (x, y) = seg(&h, env, x, y)?;
            let b = Binding::Int(size(&h, x, y));
            env.bind(out, b);
            Some(b)
        }
        JstOp::Get { x, i, out } => {
            let b = get(&h, node(&h, env, x)?, int(env, i)?);
            env.bind(out, b);
            Some(b)
        }
        JstOp::Add { x, i, v } => {
            let l = list(env, x)?;
            splice(&mut h, l, int(env, i)?, value(env, v)?, false)?;
            None
        }
        JstOp::AddLast { x, v } => {
            let l = list(env, x)?;
            let n = h.len(l) as i64;
            splice(&mut h, l, n, value(env, v)?, false)?;
            None
        }
        JstOp::Set { x, i, v } => {
            let l = list(env, x)?;
            splice(&mut h, l, int(env, i)?, value(env, v)?, true)?;
            None
        }
        JstOp::Remove { x } => {
            let n = node(&h, env, x)?;
            if n == NIL {
                return Err(JstError::IndexOutOfRange(0));
            }
            unlink(&mut h, n, &mut env.slots);
            None
        }
        JstOp::RemoveVal { x, y, v } => {
            let (a, b) = seg(&h, env, x, y)?;
            let v = value(env, v)?;
            remove_val(&mut h, a, b, v, &mut env.slots);
            None
        }
        JstOp::Exists { x, y, p, out } => {
            let (a, b) = seg(&h, env, x, y)?;
            let r = Binding::Bool(exists(&h, a, b, p));
            env.bind(out, r);
            Some(r)
        }
        JstOp::Forall { x, y, p, out } => {
            let (a, b) = seg(&h, env, x, y)?;
            let r = Binding::Bool(forall(&h, a, b, p));
            env.bind(out, r);
            Some(r)
        }
        JstOp::Sorted { x, y, ret } => {
            let (a, b) = seg(&h, env, x, y)?;
            let head = sorted(&mut h, a, b);
            bind_new(&mut h, env, ret, head)
        }
        JstOp::Min { x, y, out } => {
            let (a, b) = seg(&h, env, x, y)?;
            let r = Binding::Int(min(&h, a, b));
            env.bind(out, r);
            Some(r)
        }
        JstOp::Max { x, y, out } => {
            let (a, b) = seg(&h, env, x, y)?;
            let r = Binding::Int(max(&h, a, b));
            env.bind(out, r);
            Some(r)
        }
        JstOp::Filter { x, y, p, ret } => {
            let (a, b) = seg(&h, env, x, y)?;
            let head = filter(&mut h, a, b, p);
            bind_new(&mut h, env, ret, head)
        }
        JstOp::Map { x, y, f, ret } => {
            let (a, b) = seg(&h, env, x, y)?;
            let head = map(&mut h, a, b, f);
            bind_new(&mut h, env, ret, head)
        }
        JstOp::Skip { x, y, n, ret } => {
            let (a, b) = seg(&h, env, x, y)?;
            let head = skip(&mut h, a, b, 0, int(env, n)?);
            bind_new(&mut h, env, ret, head)
        }
        JstOp::Limit { x, y, n, ret } => {
            let (a, b) = seg(&h, env, x, y)?;
            let head = limit(&mut h, a, b, 0, int(env, n)?);
            bind_new(&mut h, env, ret, head)
        }
        JstOp::Reduce { x, y, v, f, out } => {
            let (a, b) = seg(&h, env, x, y)?;
            let r = Binding::Int(reduce(&h, a, b, value(env, v)?, f) as i64);
            env.bind(out, r);
            Some(r)
        }
        JstOp::Concat { x, y, a, b, ret } => {
            let (x0, y0) = seg(&h, env, x, y)?;
            let (a0, b0) = seg(&h, env, a, b)?;
            let second = copy(&mut h, a0, b0);
            let values: Vec<i32> = h.walk(x0, y0).map(|n| val(&h, n)).collect();
            let mut head = second;
            for v in values.into_iter().rev() {
                head = add0(&mut h, v, head);
            }
            bind_new(&mut h, env, ret, head)
        }
        JstOp::Copy { x, y, ret } => {
            let (a, b) = seg(&h, env, x, y)?;
            let head = copy(&mut h, a, b);
            bind_new(&mut h, env, ret, head)
        }
        JstOp::New { x } => bind_new(&mut h, env, x, NIL),
        JstOp::GetIterator { x, i, it } => {
            let start = node(&h, env, x)?;
            let i = int(env, i)?;
            let n = size(&h, start, NIL);
            if i < 0 || i > n {
                return Err(JstError::IndexOutOfRange(i));
            }
            let pos = h.walk(start, NIL).nth(i as usize).unwrap_or(NIL);
            let b = Binding::Pos(pos);
            env.bind(it, b);
            Some(b)
        }
    };
    Ok((h, out))
}

/// Whether `[x, y)` in `h1` and `[a, b)` in `h2` hold the same values in
/// the same order.
pub fn equal_lists(h1: &Heap, x: u32, y: u32, h2: &Heap, a: u32, b: u32) -> bool {
    match (x == y, a == b) {
        (true, true) => true,
        (true, false) | (false, true) => false,
        _ => val(h1, x) == val(h2, a) && equal_lists(h1, next(h1, x), y, h2, next(h2, a), b),
    }
}

/// Threads the heap through `ops` left to right.
pub fn eval_pipeline(ops: &[JstOp], h0: &Heap, env: &mut Env) -> R<(Heap, Option<Binding>)> {
    let mut h = h0.clone();
    let mut last = None;
    for op in ops {
        let (h2, r) = eval_op(op, &h, env)?;
        h = h2;
        last = r;
    }
    Ok((h, last))
}

/// Result of a term evaluated over the heap operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermResult {
    Unchanged,
    List(Vec<i32>),
    Scalar(Value),
}

/// Lowers `p` to operations over an environment whose first slots hold the
/// pre-state references; returns the ops and the slot of the result list.
pub fn lower_pipeline(p: &Pipeline, next_slot: &mut Slot) -> (Vec<JstOp>, Slot) {
    let mut fresh = || {
        *next_slot += 1;
        *next_slot - 1
    };
    let mut ops = Vec::new();
    let mut cur = fresh();
    ops.push(JstOp::Copy { x: p.source, y: None, ret: cur });
    for st in &p.stages {
        let ret = fresh();
        let count = |c: Count, ops: &mut Vec<JstOp>, fresh: &mut dyn FnMut() -> Slot| match c {
            Count::Lit(n) => Operand::Const(n as i64),
            Count::SizeOf(s) => {
                let out = fresh();
                ops.push(JstOp::Size { x: s, y: None, out });
                Operand::Var(out)
            }
        };
        let op = match *st {
            Stage::Filter(p) => JstOp::Filter { x: cur, y: None, p, ret },
            Stage::Map(f) => JstOp::Map { x: cur, y: None, f, ret },
            Stage::Sorted => JstOp::Sorted { x: cur, y: None, ret },
            Stage::Skip(c) => JstOp::Skip { x: cur, y: None, n: count(c, &mut ops, &mut fresh), ret },
            Stage::Limit(c) => JstOp::Limit { x: cur, y: None, n: count(c, &mut ops, &mut fresh), ret },
        };
        ops.push(op);
        cur = ret;
    }
    (ops, cur)
}

/// Evaluates `t` for output list or scalar `target` with the heap rules.
pub fn eval_term_on_heap(t: &OutputTerm, target: Option<Slot>, pre: &Heap) -> R<TermResult> {
    let mut env = Env::default();
    for (s, &h) in pre.refs.iter().enumerate() {
        env.bind(s, if h == NIL { Binding::Null } else { Binding::List(h) });
    }
    let mut next_slot = pre.refs.len();
    let list_of = |h: &Heap, env: &Env, s: Slot| -> R<Vec<i32>> { Ok(h.to_vec(list(env, s)?)) };
    match t {
        OutputTerm::Unchanged => Ok(TermResult::Unchanged),
        OutputTerm::Replace(p) => {
            let (ops, ret) = lower_pipeline(p, &mut next_slot);
            let (h, _) = eval_pipeline(&ops, pre, &mut env)?;
            Ok(TermResult::List(list_of(&h, &env, ret)?))
        }
        OutputTerm::Append(p) => {
            let (mut ops, ret) = lower_pipeline(p, &mut next_slot);
            let out = next_slot;
            let target = target.ok_or(JstError::WrongKind)?;
            ops.push(JstOp::Concat { x: target, y: None, a: ret, b: None, ret: out });
            let (h, _) = eval_pipeline(&ops, pre, &mut env)?;
            Ok(TermResult::List(list_of(&h, &env, out)?))
        }
        OutputTerm::AddLast(c) => {
            let target = target.ok_or(JstError::WrongKind)?;
            let out = next_slot;
            let ops = [
                JstOp::Copy { x: target, y: None, ret: out },
                JstOp::AddLast { x: out, v: Operand::Const(*c as i64) },
            ];
            let (h, _) = eval_pipeline(&ops, pre, &mut env)?;
            Ok(TermResult::List(list_of(&h, &env, out)?))
        }
        OutputTerm::Scalar(p, term) => {
            let (mut ops, ret) = lower_pipeline(p, &mut next_slot);
            let out = next_slot;
            let (with_default, default) = match *term {
                Terminal::Reduce { identity, op } => {
                    ops.push(JstOp::Reduce { x: ret, y: None, v: Operand::Const(identity as i64), f: op, out });
                    (false, Value::Null)
                }
                Terminal::Max { default } => {
                    ops.push(JstOp::Max { x: ret, y: None, out });
                    (true, default)
                }
                Terminal::Min { default } => {
                    ops.push(JstOp::Min { x: ret, y: None, out });
                    (true, default)
                }
                Terminal::FindFirst { default } => {
                    // filter + limit(1) + get(0).
                    ops.push(JstOp::Limit { x: ret, y: None, n: Operand::Const(1), ret: out + 1 });
                    ops.push(JstOp::Get { x: out + 1, i: Operand::Const(0), out });
                    (true, default)
                }
                Terminal::AllMatch(p) => {
                    ops.push(JstOp::Forall { x: ret, y: None, p, out });
                    (false, Value::Null)
                }
                Terminal::AnyMatch(p) => {
                    ops.push(JstOp::Exists { x: ret, y: None, p, out });
                    (false, Value::Null)
                }
                Terminal::Count => {
                    ops.push(JstOp::Size { x: ret, y: None, out });
                    (false, Value::Null)
                }
            };
            let (_, r) = eval_pipeline(&ops, pre, &mut env)?;
            let v = match r.ok_or(JstError::WrongKind)? {
                Binding::Int(i) if with_default && (i == POS_INF || i == NEG_INF) => default,
                Binding::Int(i) => Value::Int(i32::try_from(i).map_err(|_| JstError::WrongKind)?),
                Binding::Bool(b) => Value::Bool(b),
                Binding::Null if with_default => default,
                _ => return Err(JstError::WrongKind),
            };
            Ok(TermResult::Scalar(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Atom, CmpOp};
    use super::*;

    fn setup(lists: &[&[i32]]) -> (Heap, Env) {
        let mut h = Heap::with_refs(lists.len());
        let mut env = Env::default();
        for (i, l) in lists.iter().enumerate() {
            h.refs[i] = h.new_list(l);
            env.bind(i, Binding::List(h.refs[i]));
        }
        (h, env)
    }

    fn ret_list(h: &Heap, env: &Env, s: Slot) -> Vec<i32> {
        h.to_vec(list(env, s).unwrap())
    }

    #[test]
    fn filter_positive() {
        let (h, mut env) = setup(&[&[1, 0, -2]]);
        let p = Pred::One(Atom::Cmp(CmpOp::Gt, 0));
        let (h2, _) = eval_op(&JstOp::Filter { x: 0, y: None, p, ret: 1 }, &h, &mut env).unwrap();
        assert_eq!(ret_list(&h2, &env, 1), [1]);
        assert_eq!(h2.to_vec(h2.refs[0]), [1, 0, -2]);
        assert_eq!(h.nodes.len(), 3, "input heap untouched");
    }

    #[test]
    fn map_of_empty_adds_only_an_empty_list() {
        let (h, mut env) = setup(&[&[]]);
        let (h2, _) = eval_op(&JstOp::Map { x: 0, y: None, f: Mapper { a: 2, b: 0 }, ret: 1 }, &h, &mut env).unwrap();
        assert_eq!(h2.nodes.len(), h.nodes.len());
        assert_eq!(h2.lists.len(), h.lists.len() + 1);
        assert_eq!(ret_list(&h2, &env, 1), Vec::<i32>::new());
    }

    #[test]
    fn reduce_sorted_skip() {
        let (h, mut env) = setup(&[&[1, 2, 3], &[3, 1, 2], &[5, 6, 7, 8]]);
        let (_, r) = eval_op(&JstOp::Reduce { x: 0, y: None, v: Operand::Const(0), f: AccOp::Add, out: 3 }, &h, &mut env).unwrap();
        assert_eq!(r, Some(Binding::Int(6)));
        let (h2, _) = eval_op(&JstOp::Sorted { x: 1, y: None, ret: 4 }, &h, &mut env).unwrap();
        assert_eq!(ret_list(&h2, &env, 4), [1, 2, 3]);
        assert_eq!(h2.to_vec(h2.refs[1]), [3, 1, 2]);
        let (h3, _) = eval_op(&JstOp::Skip { x: 2, y: None, n: Operand::Const(3), ret: 5 }, &h, &mut env).unwrap();
        assert_eq!(ret_list(&h3, &env, 5), [8]);
    }

    #[test]
    fn segments_and_iterators() {
        let (h, mut env) = setup(&[&[4, 5, 6, 7]]);
        let (h, _) = eval_op(&JstOp::GetIterator { x: 0, i: Operand::Const(2), it: 1 }, &h, &mut env).unwrap();
        let (_, r) = eval_op(&JstOp::Size { x: 0, y: Some(1), out: 2 }, &h, &mut env).unwrap();
        assert_eq!(r, Some(Binding::Int(2)));
        let (_, r) = eval_op(&JstOp::Max { x: 0, y: Some(1), out: 2 }, &h, &mut env).unwrap();
        assert_eq!(r, Some(Binding::Int(5)));
        let (_, r) = eval_op(&JstOp::Min { x: 1, y: Some(1), out: 2 }, &h, &mut env).unwrap();
        assert_eq!(r, Some(Binding::Int(POS_INF)));
        // The end must be reachable from the start.
        let e = eval_op(&JstOp::Size { x: 1, y: Some(0), out: 2 }, &h, &mut env);
        assert_eq!(e.unwrap_err(), JstError::IllFormedSegment);
        let (h2, _) = eval_op(&JstOp::Remove { x: 1 }, &h, &mut env).unwrap();
        assert_eq!(h2.to_vec(h2.refs[0]), [4, 5, 7]);
        assert_eq!(get(&h2, node(&h2, &env, 1).unwrap(), 0), Binding::Int(7));
    }

    #[test]
    fn equal_lists_across_heaps() {
        let (h1, _) = setup(&[&[1, 2]]);
        let (mut h2, _) = setup(&[&[0, 1, 2]]);
        let a = h2.lists[0].head;
        let b = h2.nodes[a as usize].next;
        assert!(equal_lists(&h1, h1.lists[0].head, NIL, &h2, b, NIL));
        assert!(!equal_lists(&h1, h1.lists[0].head, NIL, &h2, a, NIL));
        h2.nodes[b as usize].value = 5;
        assert!(!equal_lists(&h1, h1.lists[0].head, NIL, &h2, b, NIL));
    }
}
