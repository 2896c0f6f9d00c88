//! Heap-explicit intermediate representation.
//!
//! Every collection operation is a statement `h_out = op(h_in, args)`.
//! Reads (`size`, `get`, `hasNext`) name the heap they observe but do not
//! produce a new one.

use super::ast::{BinOp, Type, UnOp};
use std::fmt;

pub type VarId = usize;
pub type LoopId = usize;

/// Run-time value of a scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i32),
    Bool(bool),
    Null,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Null => f.write_str("null"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Pre-state variable read by the body.
    Param,
    /// Declared at the top level and definitely assigned on every exit.
    Output,
    /// Loop-local, uninitialized, or compiler-introduced.
    Temp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub ty: Type,
    pub kind: VarKind,
    /// Slot in the state vector of its class (scalar, list ref, iterator).
    pub slot: usize,
    /// Initializer of a top-level declaration when it is a constant or
    /// `new ArrayList<>()`; the value such an output has if left untouched.
    pub initial: Option<Initial>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Initial {
    Scalar(Value),
    EmptyList,
}

/// `h_i`, `h_o`, `h_o'`, `h_o''`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeapName {
    pub initial: bool,
    pub primes: u8,
}

impl HeapName {
    pub const I: HeapName = HeapName { initial: true, primes: 0 };
    pub const O: HeapName = HeapName { initial: false, primes: 0 };

    pub fn primed(primes: u8) -> HeapName {
        HeapName { initial: false, primes }
    }
}

impl fmt::Display for HeapName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.initial { "h_i" } else { "h_o" })?;
        for _ in 0..self.primes {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrExpr {
    Const(Value),
    Var(VarId),
    Unary(UnOp, Box<IrExpr>),
    Binary(BinOp, Box<IrExpr>, Box<IrExpr>),
    Size { heap: HeapName, list: VarId },
    Get { heap: HeapName, list: VarId, index: Box<IrExpr> },
    HasNext { heap: HeapName, iter: VarId },
    /// `Integer` to `int` conversion; faults on null.
    Unbox(Box<IrExpr>),
}

impl IrExpr {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a IrExpr)) {
        f(self);
        match self {
            IrExpr::Unary(_, e) => e.walk(f),
            IrExpr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            IrExpr::Get { index, .. } => index.walk(f),
            IrExpr::Unbox(e) => e.walk(f),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeapOp {
    /// `dst = new ArrayList<>()`.
    NewList { dst: VarId },
    /// `dst = new ArrayList<>(src)`.
    CopyList { dst: VarId, src: VarId },
    /// `dst = src` on list references.
    AliasList { dst: VarId, src: VarId },
    Iterator { dst: VarId, list: VarId },
    AddLast { list: VarId, value: IrExpr },
    AddAt { list: VarId, index: IrExpr, value: IrExpr },
    /// `old = l.set(i, v)`; `old` receives the replaced value.
    Set { list: VarId, index: IrExpr, value: IrExpr, old: Option<VarId> },
    Clear { list: VarId },
    RemoveAt { list: VarId, index: IrExpr, removed: Option<VarId> },
    Next { iter: VarId, dst: Option<VarId> },
    IterRemove { iter: VarId },
    /// `h_o = copyHeap(h_i)` before a compound statement that may mutate.
    CopyHeap,
}

impl HeapOp {
    pub fn name(&self) -> &'static str {
        match self {
            HeapOp::NewList { .. } => "new",
            HeapOp::CopyList { .. } => "copy",
            HeapOp::AliasList { .. } => "alias",
            HeapOp::Iterator { .. } => "iterator",
            HeapOp::AddLast { .. } => "add_last",
            HeapOp::AddAt { .. } => "add",
            HeapOp::Set { .. } => "set",
            HeapOp::Clear { .. } => "clear",
            HeapOp::RemoveAt { .. } => "remove",
            HeapOp::Next { .. } => "next",
            HeapOp::IterRemove { .. } => "remove",
            HeapOp::CopyHeap => "copyHeap",
        }
    }

    /// Whether the op can change list structure or contents.
    pub fn mutates_lists(&self) -> bool {
        matches!(
            self,
            HeapOp::AddLast { .. }
                | HeapOp::AddAt { .. }
                | HeapOp::Set { .. }
                | HeapOp::Clear { .. }
                | HeapOp::RemoveAt { .. }
                | HeapOp::IterRemove { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrStmt {
    Assign { var: VarId, value: IrExpr },
    Heap { out: HeapName, input: HeapName, op: HeapOp },
    If { cond: IrExpr, then: Vec<IrStmt>, els: Vec<IrStmt> },
    /// `while (guard) { body; update }`; `continue` jumps to `update`.
    Loop { id: LoopId, guard: IrExpr, body: Vec<IrStmt>, update: Vec<IrStmt> },
    Break,
    Continue,
    Return,
}

/// How a loop walks its list, recovered from the guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traversal {
    /// `while (it.hasNext())`.
    Iter { iter: VarId, list: VarId },
    /// `i < l.size()` (optionally `- k`) as the guard or one of its conjuncts.
    Index { var: VarId, list: VarId },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopRecord {
    pub id: LoopId,
    /// Invariant placeholder name, unique per loop.
    pub invariant: String,
    pub parent: Option<LoopId>,
    pub traversal: Traversal,
    /// Variables in scope at the loop head, in declaration order.
    pub scope: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrProgram {
    pub name: String,
    pub vars: Vec<VarInfo>,
    /// Parameters referenced by the body, in declaration order.
    pub params: Vec<VarId>,
    pub body: Vec<IrStmt>,
    pub loops: Vec<LoopRecord>,
    /// Outputs in declaration order: list params first, then top-level
    /// declarations.
    pub outputs: Vec<VarId>,
    pub n_scalars: usize,
    pub n_lists: usize,
    pub n_iters: usize,
}

impl IrProgram {
    pub fn var(&self, id: VarId) -> &VarInfo {
        &self.vars[id]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn list_params(&self) -> impl Iterator<Item = VarId> + '_ {
        self.params.iter().copied().filter(|&v| self.vars[v].ty == Type::List)
    }

    /// Name of the list variable with the given list slot.
    pub fn list_name(&self, slot: usize) -> &str {
        self.vars
            .iter()
            .find(|v| v.ty == Type::List && v.slot == slot)
            .map(|v| v.name.as_str())
            .unwrap_or("?")
    }

    /// Whether any statement can mutate a list.
    pub fn mutates(&self) -> bool {
        fn any(stmts: &[IrStmt]) -> bool {
            stmts.iter().any(|s| match s {
                IrStmt::Heap { op, .. } => op.mutates_lists(),
                IrStmt::If { then, els, .. } => any(then) || any(els),
                IrStmt::Loop { body, update, .. } => any(body) || any(update),
                _ => false,
            })
        }
        any(&self.body)
    }

    /// Every heap-producing statement on some path, in program order.
    pub fn heap_stmts(&self) -> Vec<(HeapName, HeapName, &HeapOp)> {
        fn collect<'a>(stmts: &'a [IrStmt], out: &mut Vec<(HeapName, HeapName, &'a HeapOp)>) {
            for s in stmts {
                match s {
                    IrStmt::Heap { out: o, input, op } => out.push((*o, *input, op)),
                    IrStmt::If { then, els, .. } => {
                        collect(then, out);
                        collect(els, out);
                    }
                    IrStmt::Loop { body, update, .. } => {
                        collect(body, out);
                        collect(update, out);
                    }
                    _ => {}
                }
            }
        }
        let mut v = Vec::new();
        collect(&self.body, &mut v);
        v
    }
}

impl fmt::Display for IrProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> =
            self.params.iter().map(|&v| format!("{} {}", self.vars[v].ty, self.vars[v].name)).collect();
        writeln!(f, "void {}({}) {{", self.name, params.join(", "))?;
        let mut p = IrPrinter { ir: self, f };
        p.block(&self.body, 1)?;
        writeln!(f, "}}")
    }
}

struct IrPrinter<'a, 'b, 'c> {
    ir: &'a IrProgram,
    f: &'b mut fmt::Formatter<'c>,
}

impl IrPrinter<'_, '_, '_> {
    fn name(&self, v: VarId) -> &str {
        &self.ir.vars[v].name
    }

    fn expr(&self, e: &IrExpr) -> String {
        match e {
            IrExpr::Const(v) => v.to_string(),
            IrExpr::Var(v) => self.name(*v).to_string(),
            IrExpr::Unary(UnOp::Neg, e) => format!("-({})", self.expr(e)),
            IrExpr::Unary(UnOp::Not, e) => format!("!({})", self.expr(e)),
            IrExpr::Binary(op, l, r) => format!("({} {} {})", self.expr(l), op.symbol(), self.expr(r)),
            IrExpr::Size { heap, list } => format!("size({heap}, {})", self.name(*list)),
            IrExpr::Get { heap, list, index } => {
                format!("get({heap}, {}, {})", self.name(*list), self.expr(index))
            }
            IrExpr::HasNext { heap, iter } => format!("hasNext({heap}, {})", self.name(*iter)),
            IrExpr::Unbox(e) => format!("unbox({})", self.expr(e)),
        }
    }

    fn line(&mut self, depth: usize, text: &str) -> fmt::Result {
        for _ in 0..depth {
            self.f.write_str("  ")?;
        }
        writeln!(self.f, "{text}")
    }

    fn block(&mut self, stmts: &[IrStmt], depth: usize) -> fmt::Result {
        for s in stmts {
            self.stmt(s, depth)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &IrStmt, depth: usize) -> fmt::Result {
        match s {
            IrStmt::Assign { var, value } => {
                let t = format!("{} = {};", self.name(*var), self.expr(value));
                self.line(depth, &t)
            }
            IrStmt::Heap { out, input, op } => {
                let args = match op {
                    HeapOp::NewList { dst } => self.name(*dst).to_string(),
                    HeapOp::CopyList { dst, src } => format!("{}, {}", self.name(*src), self.name(*dst)),
                    HeapOp::AliasList { dst, src } => format!("{}, {}", self.name(*dst), self.name(*src)),
                    HeapOp::Iterator { list, .. } => self.name(*list).to_string(),
                    HeapOp::AddLast { list, value } => format!("{}, {}", self.name(*list), self.expr(value)),
                    HeapOp::AddAt { list, index, value } => {
                        format!("{}, {}, {}", self.name(*list), self.expr(index), self.expr(value))
                    }
                    HeapOp::Set { list, index, value, .. } => {
                        format!("{}, {}, {}", self.name(*list), self.expr(index), self.expr(value))
                    }
                    HeapOp::Clear { list } => self.name(*list).to_string(),
                    HeapOp::RemoveAt { list, index, .. } => format!("{}, {}", self.name(*list), self.expr(index)),
                    HeapOp::Next { iter, .. } | HeapOp::IterRemove { iter } => self.name(*iter).to_string(),
                    HeapOp::CopyHeap => String::new(),
                };
                let call = if args.is_empty() {
                    format!("{}({input})", op.name())
                } else {
                    format!("{}({input}, {args})", op.name())
                };
                let lhs = match op {
                    HeapOp::Iterator { dst, .. } => format!("({}, {out})", self.name(*dst)),
                    HeapOp::Next { dst: Some(d), .. }
                    | HeapOp::Set { old: Some(d), .. }
                    | HeapOp::RemoveAt { removed: Some(d), .. } => format!("({}, {out})", self.name(*d)),
                    _ => out.to_string(),
                };
                let t = format!("{lhs} = {call};");
                self.line(depth, &t)
            }
            IrStmt::If { cond, then, els } => {
                let t = format!("if ({}) {{", self.expr(cond));
                self.line(depth, &t)?;
                self.block(then, depth + 1)?;
                if !els.is_empty() {
                    self.line(depth, "} else {")?;
                    self.block(els, depth + 1)?;
                }
                self.line(depth, "}")
            }
            IrStmt::Loop { id, guard, body, update } => {
                let t = format!("while ({}) {{ // loop {id}, {}", self.expr(guard), self.ir.loops[*id].invariant);
                self.line(depth, &t)?;
                self.block(body, depth + 1)?;
                if !update.is_empty() {
                    self.line(depth + 1, "// update")?;
                    self.block(update, depth + 1)?;
                }
                self.line(depth, "}")
            }
            IrStmt::Break => self.line(depth, "break;"),
            IrStmt::Continue => self.line(depth, "continue;"),
            IrStmt::Return => self.line(depth, "return;"),
        }
    }
}
