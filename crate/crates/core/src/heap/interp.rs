//! Big-step interpreter for the IR with Java collection semantics.

use super::{FaultKind, IterState, ProgramState, Status, NIL};
use crate::frontend::ast::{BinOp, UnOp};
use crate::frontend::ir::{HeapOp, IrExpr, IrProgram, IrStmt, LoopId, Value, VarId};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopEvent {
    /// Before the first guard evaluation.
    Entry,
    /// Before every later guard evaluation.
    Head,
    /// After a false guard, a `break`, or a `return` out of the loop.
    Exit,
}

/// Watches loop boundaries during a run.
pub trait Observer {
    /// Returning `false` stops the run.
    fn on_loop(&mut self, event: LoopEvent, id: LoopId, state: &ProgramState) -> bool;
}

pub struct NoObserver;

impl Observer for NoObserver {
    #[inline]
    fn on_loop(&mut self, _: LoopEvent, _: LoopId, _: &ProgramState) -> bool {
        true
    }
}

/// Runs `ir` from a copy of `s0`.
pub fn run(ir: &IrProgram, s0: &ProgramState, fuel: u64) -> ProgramState {
    let mut st = s0.clone();
    exec(ir, &mut st, fuel, &mut NoObserver);
    st
}

/// Runs `ir` in place. Faults and fuel exhaustion are recorded in
/// `state.status`. Returns `false` if the observer stopped the run.
pub fn exec<O: Observer>(ir: &IrProgram, state: &mut ProgramState, fuel: u64, obs: &mut O) -> bool {
    if state.status != Status::Normal {
        return true;
    }
    let mut m = Machine { ir, st: state, fuel, obs, stopped: false };
    m.block(&ir.body);
    !m.stopped
}

enum Flow {
    Next,
    Break,
    Continue,
    Return,
    /// Fault, fuel exhaustion or observer stop.
    Halt,
}

struct Machine<'a, O> {
    ir: &'a IrProgram,
    st: &'a mut ProgramState,
    fuel: u64,
    obs: &'a mut O,
    stopped: bool,
}

type Ev<T> = Result<T, FaultKind>;

fn int(v: Value) -> Ev<i32> {
    match v {
        Value::Int(i) => Ok(i),
        Value::Null => Err(FaultKind::NullPointer),
        Value::Bool(_) => unreachable!("type checked"),
    }
}

impl<O: Observer> Machine<'_, O> {
    fn slot(&self, v: VarId) -> usize {
        self.ir.vars[v].slot
    }

    fn list_of(&self, v: VarId) -> u32 {
        let h = self.st.heap.refs[self.slot(v)];
        debug_assert_ne!(h, NIL, "lists are never null");
        h
    }

    fn tick(&mut self) -> bool {
        if self.fuel == 0 {
            self.st.status = Status::OutOfFuel;
            return false;
        }
        self.fuel -= 1;
        true
    }

    fn fault(&mut self, k: FaultKind) -> Flow {
        self.st.status = Status::Exception(k);
        Flow::Halt
    }

    fn notify(&mut self, ev: LoopEvent, id: LoopId) -> bool {
        if self.obs.on_loop(ev, id, self.st) {
            true
        } else {
            self.stopped = true;
            false
        }
    }

    fn block(&mut self, stmts: &[IrStmt]) -> Flow {
        for s in stmts {
            match self.stmt(s) {
                Flow::Next => {}
                other => return other,
            }
        }
        Flow::Next
    }

    fn stmt(&mut self, s: &IrStmt) -> Flow {
        if !self.tick() {
            return Flow::Halt;
        }
        match s {
            IrStmt::Assign { var, value } => match self.eval(value) {
                Ok(v) => {
                    let slot = self.slot(*var);
                    self.st.scalars[slot] = v;
                    Flow::Next
                }
                Err(k) => self.fault(k),
            },
            IrStmt::Heap { op, .. } => match self.heap_op(op) {
                Ok(()) => Flow::Next,
                Err(k) => self.fault(k),
            },
            IrStmt::If { cond, then, els } => match self.eval(cond) {
                Ok(Value::Bool(true)) => self.block(then),
                Ok(_) => self.block(els),
                Err(k) => self.fault(k),
            },
            IrStmt::Loop { id, guard, body, update } => self.run_loop(*id, guard, body, update),
            IrStmt::Break => Flow::Break,
            IrStmt::Continue => Flow::Continue,
            IrStmt::Return => Flow::Return,
        }
    }

    fn run_loop(&mut self, id: LoopId, guard: &IrExpr, body: &[IrStmt], update: &[IrStmt]) -> Flow {
        if !self.notify(LoopEvent::Entry, id) {
            return Flow::Halt;
        }
        loop {
            if !self.tick() {
                return Flow::Halt;
            }
            match self.eval(guard) {
                Ok(Value::Bool(true)) => {}
                Ok(_) => break,
                Err(k) => return self.fault(k),
            }
            match self.block(body) {
                Flow::Next | Flow::Continue => {}
                Flow::Break => break,
                Flow::Return => {
                    return if self.notify(LoopEvent::Exit, id) { Flow::Return } else { Flow::Halt };
                }
                Flow::Halt => return Flow::Halt,
            }
            match self.block(update) {
                Flow::Next => {}
                Flow::Halt => return Flow::Halt,
                _ => unreachable!("updates are simple statements"),
            }
            if !self.notify(LoopEvent::Head, id) {
                return Flow::Halt;
            }
        }
        if self.notify(LoopEvent::Exit, id) {
            Flow::Next
        } else {
            Flow::Halt
        }
    }

    fn index(&mut self, e: &IrExpr, list: u32, inclusive: bool) -> Ev<usize> {
        let i = int(self.eval(e)?)?;
        let len = self.st.heap.len(list);
        if i < 0 || (i as usize) > len || (i as usize == len && !inclusive) {
            return Err(FaultKind::IndexOutOfBounds);
        }
        Ok(i as usize)
    }

    fn set_scalar(&mut self, v: Option<VarId>, value: i32) {
        if let Some(v) = v {
            let slot = self.slot(v);
            self.st.scalars[slot] = Value::Int(value);
        }
    }

    fn heap_op(&mut self, op: &HeapOp) -> Ev<()> {
        match op {
            HeapOp::NewList { dst } => {
                let h = self.st.heap.new_list(&[]);
                let slot = self.slot(*dst);
                self.st.heap.refs[slot] = h;
            }
            HeapOp::CopyList { dst, src } => {
                let src = self.list_of(*src);
                let values = self.st.heap.to_vec(src);
                let h = self.st.heap.new_list(&values);
                let slot = self.slot(*dst);
                self.st.heap.refs[slot] = h;
            }
            HeapOp::AliasList { dst, src } => {
                let h = self.list_of(*src);
                let slot = self.slot(*dst);
                self.st.heap.refs[slot] = h;
            }
            HeapOp::Iterator { dst, list } => {
                let list = self.list_of(*list);
                let expected_mod = self.st.heap.lists[list as usize].mod_count;
                let slot = self.slot(*dst);
                self.st.iters[slot] = Some(IterState { list, cursor: 0, last_ret: -1, expected_mod });
            }
            HeapOp::AddLast { list, value } => {
                let list = self.list_of(*list);
                let v = int(self.eval(value)?)?;
                self.st.heap.push(list, v);
            }
            HeapOp::AddAt { list, index, value } => {
                let list = self.list_of(*list);
                let i = self.index(index, list, true)?;
                let v = int(self.eval(value)?)?;
                self.st.heap.insert(list, i, v);
            }
            HeapOp::Set { list, index, value, old } => {
                let list = self.list_of(*list);
                let i = self.index(index, list, false)?;
                let v = int(self.eval(value)?)?;
                let node = self.st.heap.node_at(list, i).expect("index checked");
                let prev = std::mem::replace(&mut self.st.heap.nodes[node as usize].value, v);
                self.set_scalar(*old, prev);
            }
            HeapOp::Clear { list } => {
                let list = self.list_of(*list);
                self.st.heap.clear(list);
            }
            HeapOp::RemoveAt { list, index, removed } => {
                let list = self.list_of(*list);
                let i = self.index(index, list, false)?;
                let v = self.st.heap.remove(list, i);
                self.set_scalar(*removed, v);
            }
            HeapOp::Next { iter, dst } => {
                let slot = self.slot(*iter);
                let mut it = self.st.iters[slot].expect("iterator bound");
                if self.st.heap.lists[it.list as usize].mod_count != it.expected_mod {
                    return Err(FaultKind::ConcurrentModification);
                }
                let v = self.st.heap.get(it.list, it.cursor as usize).ok_or(FaultKind::NoSuchElement)?;
                it.last_ret = it.cursor as i32;
                it.cursor += 1;
                self.st.iters[slot] = Some(it);
                self.set_scalar(*dst, v);
            }
            HeapOp::IterRemove { iter } => {
                let slot = self.slot(*iter);
                let mut it = self.st.iters[slot].expect("iterator bound");
                if it.last_ret < 0 {
                    return Err(FaultKind::IllegalState);
                }
                if self.st.heap.lists[it.list as usize].mod_count != it.expected_mod {
                    return Err(FaultKind::ConcurrentModification);
                }
                self.st.heap.remove(it.list, it.last_ret as usize);
                it.cursor = it.last_ret as u32;
                it.last_ret = -1;
                it.expected_mod = self.st.heap.lists[it.list as usize].mod_count;
                self.st.iters[slot] = Some(it);
            }
            HeapOp::CopyHeap => {}
        }
        Ok(())
    }

    fn eval(&mut self, e: &IrExpr) -> Ev<Value> {
        Ok(match e {
            IrExpr::Const(v) => *v,
            IrExpr::Var(v) => self.st.scalars[self.slot(*v)],
            IrExpr::Unbox(inner) => Value::Int(int(self.eval(inner)?)?),
            IrExpr::Size { list, .. } => Value::Int(self.st.heap.len(self.list_of(*list)) as i32),
            IrExpr::Get { list, index, .. } => {
                let list = self.list_of(*list);
                let i = self.index(index, list, false)?;
                Value::Int(self.st.heap.get(list, i).expect("index checked"))
            }
            IrExpr::HasNext { iter, .. } => {
                let it = self.st.iters[self.slot(*iter)].expect("iterator bound");
                Value::Bool(it.cursor as usize != self.st.heap.len(it.list))
            }
            IrExpr::Unary(UnOp::Neg, inner) => Value::Int(int(self.eval(inner)?)?.wrapping_neg()),
            IrExpr::Unary(UnOp::Not, inner) => Value::Bool(!self.truth(inner)?),
            IrExpr::Binary(BinOp::And, l, r) => Value::Bool(self.truth(l)? && self.truth(r)?),
            IrExpr::Binary(BinOp::Or, l, r) => Value::Bool(self.truth(l)? || self.truth(r)?),
            IrExpr::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                match op {
                    BinOp::Eq => Value::Bool(a == b),
                    BinOp::Ne => Value::Bool(a != b),
                    _ => Value::from(arith(*op, int(a)?, int(b)?)?),
                }
            }
        })
    }

    fn truth(&mut self, e: &IrExpr) -> Ev<bool> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            _ => unreachable!("type checked"),
        }
    }
}

/// Integer operators with Java `int` semantics.
pub(crate) fn arith(op: BinOp, a: i32, b: i32) -> Ev<ArithResult> {
    Ok(match op {
        BinOp::Add => ArithResult::Int(a.wrapping_add(b)),
        BinOp::Sub => ArithResult::Int(a.wrapping_sub(b)),
        BinOp::Mul => ArithResult::Int(a.wrapping_mul(b)),
        BinOp::Div | BinOp::Rem if b == 0 => return Err(FaultKind::Arithmetic),
        BinOp::Div => ArithResult::Int(a.wrapping_div(b)),
        BinOp::Rem => ArithResult::Int(a.wrapping_rem(b)),
        BinOp::Lt => ArithResult::Bool(a < b),
        BinOp::Le => ArithResult::Bool(a <= b),
        BinOp::Gt => ArithResult::Bool(a > b),
        BinOp::Ge => ArithResult::Bool(a >= b),
        BinOp::Eq => ArithResult::Bool(a == b),
        BinOp::Ne => ArithResult::Bool(a != b),
        BinOp::And | BinOp::Or => unreachable!("boolean operator"),
    })
}

pub(crate) enum ArithResult {
    Int(i32),
    Bool(bool),
}

impl From<ArithResult> for Value {
    fn from(r: ArithResult) -> Value {
        match r {
            ArithResult::Int(i) => Value::Int(i),
            ArithResult::Bool(b) => Value::Bool(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::heap::{Bounds, Universe};

    /// Runs `src` with its list parameters bound to `lists`, in order.
    fn run_on(src: &str, lists: &[&[i32]], fuel: u64) -> (Universe, ProgramState) {
        let (_, ir) = compile(src).unwrap();
        let u = Universe::new(&ir, &Bounds::default());
        let mut st = u.blank();
        for (name, values) in u.list_param_names().zip(lists) {
            let slot = u.ref_names.iter().position(|n| n == name).unwrap();
            let h = st.heap.new_list(values);
            st.heap.refs[slot] = h;
        }
        let out = run(&ir, &st, fuel);
        (u, out)
    }

    const FILTER_MAP: &str = "void f(List<Integer> list) { Iterator<Integer> it = list.iterator(); \
        List<Integer> newList = new ArrayList<>(); \
        while (it.hasNext()) { int el = it.next(); if (el > 0) newList.add(2 * el); } }";

    #[test]
    fn filter_and_double() {
        let (_, st) = run_on(FILTER_MAP, &[&[1, -2, 3]], DEFAULT_FUEL);
        assert_eq!(st.status, Status::Normal);
        assert_eq!(st.list(1).unwrap(), [2, 6]);
        let (_, st) = run_on(FILTER_MAP, &[&[]], DEFAULT_FUEL);
        assert_eq!(st.list(1).unwrap(), Vec::<i32>::new());
    }

    #[test]
    fn remove_negatives_in_place() {
        let src = "void r(List<Integer> l) { Iterator<Integer> it = l.iterator(); \
                   while (it.hasNext()) if (it.next() < 0) it.remove(); }";
        let (_, st) = run_on(src, &[&[1, 2, 3]], DEFAULT_FUEL);
        assert_eq!(st.list(0).unwrap(), [1, 2, 3]);
        let (_, st) = run_on(src, &[&[-1, 2, -3, -3, 4]], DEFAULT_FUEL);
        assert_eq!(st.list(0).unwrap(), [2, 4]);
    }

    #[test]
    fn java_faults() {
        let cme = "void f(List<Integer> l) { for (int v : l) l.add(v); }";
        assert_eq!(run_on(cme, &[&[1]], DEFAULT_FUEL).1.status, Status::Exception(FaultKind::ConcurrentModification));
        assert_eq!(run_on(cme, &[&[]], DEFAULT_FUEL).1.status, Status::Normal);
        let oob = "void f(List<Integer> l) { int x = l.get(5); }";
        assert_eq!(run_on(oob, &[&[1]], DEFAULT_FUEL).1.status, Status::Exception(FaultKind::IndexOutOfBounds));
        let ise = "void f(List<Integer> l) { Iterator<Integer> it = l.iterator(); it.remove(); }";
        assert_eq!(run_on(ise, &[&[1]], DEFAULT_FUEL).1.status, Status::Exception(FaultKind::IllegalState));
        let nse = "void f(List<Integer> l) { Iterator<Integer> it = l.iterator(); it.next(); }";
        assert_eq!(run_on(nse, &[&[]], DEFAULT_FUEL).1.status, Status::Exception(FaultKind::NoSuchElement));
        let div = "void f(List<Integer> l) { int x = 1 / l.size(); }";
        assert_eq!(run_on(div, &[&[]], DEFAULT_FUEL).1.status, Status::Exception(FaultKind::Arithmetic));
        let npe = "void f(List<Integer> l) { Integer r = null; int x = r + l.size(); }";
        assert_eq!(run_on(npe, &[&[]], DEFAULT_FUEL).1.status, Status::Exception(FaultKind::NullPointer));
    }

    #[test]
    fn out_of_fuel_and_monotone_fuel() {
        let spin = "void f(List<Integer> l) { while (l.size() >= 0) { } }";
        assert_eq!(run_on(spin, &[&[]], 500).1.status, Status::OutOfFuel);
        let (_, a) = run_on(FILTER_MAP, &[&[1, 2, 3]], 60);
        let (_, b) = run_on(FILTER_MAP, &[&[1, 2, 3]], DEFAULT_FUEL);
        assert_eq!(a, b);
        assert_eq!(run_on(FILTER_MAP, &[&[1, 2, 3]], 10).1.status, Status::OutOfFuel);
    }

    #[test]
    fn wrapping_arithmetic() {
        let src = "void f(List<Integer> l) { int x = 2147483647; x = x + 1; l.add(x); l.add(-2147483648 / -1); l.add(-7 % 3); }";
        let (_, st) = run_on(src, &[&[]], DEFAULT_FUEL);
        assert_eq!(st.list(0).unwrap(), [i32::MIN, i32::MIN, -1]);
    }

    struct Trace(Vec<(LoopEvent, LoopId)>);

    impl Observer for Trace {
        fn on_loop(&mut self, ev: LoopEvent, id: LoopId, _: &ProgramState) -> bool {
            self.0.push((ev, id));
            true
        }
    }

    #[test]
    fn loop_events() {
        let (_, ir) = compile(FILTER_MAP).unwrap();
        let u = Universe::new(&ir, &Bounds::default());
        let mut st = u.blank();
        st.heap.refs[0] = st.heap.new_list(&[1, 2]);
        let mut t = Trace(Vec::new());
        assert!(exec(&ir, &mut st, DEFAULT_FUEL, &mut t));
        use LoopEvent::*;
        assert_eq!(t.0, [(Entry, 0), (Head, 0), (Head, 0), (Exit, 0)]);
    }
}
