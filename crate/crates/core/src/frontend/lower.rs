//! Binding and type checks, then lowering of the AST to heap-explicit IR.

use super::ast::{AssignOp, BinOp, Expr, Method, Program, Stmt, Type, UnOp};
use super::ir::{
    HeapName, HeapOp, Initial, IrExpr, IrProgram, IrStmt, LoopId, LoopRecord, Traversal, Value, VarId,
    VarInfo, VarKind,
};
use super::FrontendError;
use std::collections::HashMap;

type R<T> = Result<T, FrontendError>;

fn binding<T>(msg: impl Into<String>) -> R<T> {
    Err(FrontendError::Binding(msg.into()))
}

fn type_err<T>(msg: impl Into<String>) -> R<T> {
    Err(FrontendError::Type(msg.into()))
}

fn unsupported<T>(msg: impl Into<String>) -> R<T> {
    Err(FrontendError::UnsupportedIr(msg.into()))
}

/// Expression types. `Integer` may hold null; `Null` is the literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ETy {
    Int,
    Integer,
    Bool,
    List,
    Iter,
    Null,
}

impl ETy {
    fn of(t: Type) -> ETy {
        match t {
            Type::Int => ETy::Int,
            Type::Integer => ETy::Integer,
            Type::Boolean => ETy::Bool,
            Type::List => ETy::List,
            Type::Iterator => ETy::Iter,
        }
    }

    fn numeric(self) -> bool {
        matches!(self, ETy::Int | ETy::Integer)
    }
}

/// Definite ("must") and possible ("may") assignment along the current path.
#[derive(Debug, Clone, Default)]
struct Flow {
    live: bool,
    must: Vec<bool>,
    may: Vec<bool>,
}

impl Flow {
    fn start() -> Flow {
        Flow { live: true, must: Vec::new(), may: Vec::new() }
    }

    fn dead() -> Flow {
        Flow { live: false, must: Vec::new(), may: Vec::new() }
    }

    fn get(v: &[bool], i: usize) -> bool {
        v.get(i).copied().unwrap_or(false)
    }

    fn set(v: &mut Vec<bool>, i: usize) {
        if v.len() <= i {
            v.resize(i + 1, false);
        }
        v[i] = true;
    }

    fn assign(&mut self, var: VarId) {
        Flow::set(&mut self.must, var);
        Flow::set(&mut self.may, var);
    }

    fn assigned(&self, var: VarId) -> bool {
        !self.live || Flow::get(&self.must, var)
    }

    fn join(a: Flow, b: Flow) -> Flow {
        match (a.live, b.live) {
            (false, _) => b,
            (_, false) => a,
            _ => {
                let n = a.must.len().max(b.must.len()).max(a.may.len()).max(b.may.len());
                let must = (0..n).map(|i| Flow::get(&a.must, i) && Flow::get(&b.must, i)).collect();
                let may = (0..n).map(|i| Flow::get(&a.may, i) || Flow::get(&b.may, i)).collect();
                Flow { live: true, must, may }
            }
        }
    }
}

/// Tracks heap reads and effects in one source expression so that hoisting
/// side effects cannot reorder them.
#[derive(Default)]
struct ExprCtx {
    reads: usize,
    effects: usize,
    /// Inside a loop guard or the right operand of `&&`/`||`.
    no_effects: Option<&'static str>,
}

struct Lowerer {
    vars: Vec<VarInfo>,
    decl_loop_depth: Vec<usize>,
    scopes: Vec<Vec<(String, VarId)>>,
    used: Vec<bool>,
    n_scalars: usize,
    n_lists: usize,
    n_iters: usize,
    loops: Vec<LoopRecord>,
    loop_stack: Vec<LoopId>,
    iter_list: HashMap<VarId, VarId>,
    flow: Flow,
    exits: Vec<Flow>,
    temps: usize,
    top_level: Vec<VarId>,
    n_params: usize,
}

pub fn lower(p: &Program) -> Result<IrProgram, FrontendError> {
    let mut l = Lowerer {
        vars: Vec::new(),
        decl_loop_depth: Vec::new(),
        scopes: vec![Vec::new()],
        used: Vec::new(),
        n_scalars: 0,
        n_lists: 0,
        n_iters: 0,
        loops: Vec::new(),
        loop_stack: Vec::new(),
        iter_list: HashMap::new(),
        flow: Flow::start(),
        exits: Vec::new(),
        temps: 0,
        top_level: Vec::new(),
        n_params: p.params.len(),
    };
    for param in &p.params {
        if param.ty == Type::Iterator {
            return unsupported(format!("iterator parameter `{}`", param.name));
        }
        let v = l.declare(&param.name, param.ty, VarKind::Param)?;
        l.flow.assign(v);
    }
    l.scopes.push(Vec::new());
    let mut body = Vec::new();
    for s in &p.body {
        l.stmt(s, &mut body, true)?;
    }
    let end = std::mem::replace(&mut l.flow, Flow::dead());
    let exit = l.exits.drain(..).fold(end, Flow::join);

    let params: Vec<VarId> = (0..l.n_params).filter(|&v| l.used[v]).collect();
    let mut outputs: Vec<VarId> =
        params.iter().copied().filter(|&v| l.vars[v].ty == Type::List).collect();
    for &v in &l.top_level {
        let info = &mut l.vars[v];
        if info.ty != Type::Iterator && exit.assigned(v) {
            info.kind = VarKind::Output;
            outputs.push(v);
        } else {
            info.initial = None;
        }
    }

    let mut ir = IrProgram {
        name: p.name.clone(),
        vars: l.vars,
        params,
        body,
        loops: l.loops,
        outputs,
        n_scalars: l.n_scalars,
        n_lists: l.n_lists,
        n_iters: l.n_iters,
    };
    name_heaps(&mut ir.body);
    Ok(ir)
}

impl Lowerer {
    fn loop_depth(&self) -> usize {
        self.loop_stack.len()
    }

    fn declare(&mut self, name: &str, ty: Type, kind: VarKind) -> R<VarId> {
        if self.scopes.iter().any(|s| s.iter().any(|(n, _)| n == name)) {
            return binding(format!("`{name}` is declared twice"));
        }
        let slot = match ty {
            Type::Int | Type::Integer | Type::Boolean => {
                self.n_scalars += 1;
                self.n_scalars - 1
            }
            Type::List => {
                self.n_lists += 1;
                self.n_lists - 1
            }
            Type::Iterator => {
                self.n_iters += 1;
                self.n_iters - 1
            }
        };
        let id = self.vars.len();
        self.vars.push(VarInfo { name: name.to_string(), ty, kind, slot, initial: None });
        self.decl_loop_depth.push(self.loop_depth());
        self.used.push(false);
        self.scopes.last_mut().expect("scope").push((name.to_string(), id));
        Ok(id)
    }

    fn temp(&mut self, ty: Type) -> VarId {
        let name = format!("$t{}", self.temps);
        self.temps += 1;
        self.declare(&name, ty, VarKind::Temp).expect("fresh temporary")
    }

    fn lookup(&mut self, name: &str) -> R<VarId> {
        for scope in self.scopes.iter().rev() {
            if let Some(&(_, v)) = scope.iter().find(|(n, _)| n == name) {
                self.used[v] = true;
                return Ok(v);
            }
        }
        binding(format!("`{name}` is not declared"))
    }

    /// A variable read: must be definitely assigned.
    fn read_var(&mut self, name: &str) -> R<VarId> {
        let v = self.lookup(name)?;
        if !self.flow.assigned(v) {
            return binding(format!("`{name}` may be used before it is assigned"));
        }
        Ok(v)
    }

    fn assign_var(&mut self, v: VarId) {
        self.flow.assign(v);
    }

    fn ty(&self, v: VarId) -> Type {
        self.vars[v].ty
    }

    fn with_scope<T>(&mut self, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.scopes.push(Vec::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Vec<IrStmt>, top: bool) -> R<()> {
        match s {
            Stmt::Decl { ty, vars } => {
                for (name, init) in vars {
                    self.decl(*ty, name, init.as_ref(), out, top)?;
                }
                Ok(())
            }
            Stmt::Assign { target, op, value } => {
                let v = self.lookup(target)?;
                let value = match op {
                    AssignOp::Set => value.clone(),
                    _ => {
                        let bop = match op {
                            AssignOp::Add => BinOp::Add,
                            AssignOp::Sub => BinOp::Sub,
                            _ => BinOp::Mul,
                        };
                        Expr::bin(bop, Expr::Var(target.clone()), value.clone())
                    }
                };
                self.assign_to(v, &value, out, false)
            }
            Stmt::Step { target, increment } => {
                let op = if *increment { BinOp::Add } else { BinOp::Sub };
                let v = self.lookup(target)?;
                let e = Expr::bin(op, Expr::Var(target.clone()), Expr::Int(1));
                self.assign_to(v, &e, out, false)
            }
            Stmt::Expr(e) => self.call_stmt(e, out),
            Stmt::If { cond, then, els } => {
                let mut ctx = ExprCtx::default();
                let (c, t) = self.expr(cond, out, &mut ctx)?;
                expect_bool(t, "if condition")?;
                let entry = self.flow.clone();
                let mut then_ir = Vec::new();
                self.with_scope(|l| l.stmt(then, &mut then_ir, false))?;
                let after_then = std::mem::replace(&mut self.flow, entry);
                let mut els_ir = Vec::new();
                if let Some(e) = els {
                    self.with_scope(|l| l.stmt(e, &mut els_ir, false))?;
                }
                let after_else = std::mem::take(&mut self.flow);
                self.flow = Flow::join(after_then, after_else);
                out.push(IrStmt::If { cond: c, then: then_ir, els: els_ir });
                Ok(())
            }
            Stmt::While { cond, body } => {
                self.with_scope(|l| l.loop_stmt(Some(cond), body, None, &[], out))
            }
            Stmt::For { init, cond, update, body } => self.with_scope(|l| {
                if let Some(i) = init {
                    l.stmt(i, out, false)?;
                }
                l.loop_stmt(cond.as_ref(), body, update.as_deref(), &[], out)
            }),
            Stmt::ForEach { var, list, body } => self.with_scope(|l| {
                let lv = l.read_var(list)?;
                if l.ty(lv) != Type::List {
                    return type_err(format!("enhanced for over non-list `{list}`"));
                }
                let name = format!("$it{}", l.n_iters);
                let it = l.declare(&name, Type::Iterator, VarKind::Temp)?;
                out.push(heap(HeapOp::Iterator { dst: it, list: lv }));
                l.iter_list.insert(it, lv);
                l.assign_var(it);
                let el = l.declare(var, Type::Int, VarKind::Temp)?;
                let prologue = [heap(HeapOp::Next { iter: it, dst: Some(el) })];
                let guard = Expr::Call { recv: l.vars[it].name.clone(), method: Method::HasNext, args: vec![] };
                l.loop_stmt(Some(&guard), body, None, &prologue, out)
            }),
            Stmt::Break | Stmt::Continue => {
                if self.loop_stack.is_empty() {
                    return binding("`break` or `continue` outside a loop");
                }
                out.push(if matches!(s, Stmt::Break) { IrStmt::Break } else { IrStmt::Continue });
                self.flow = Flow::dead();
                Ok(())
            }
            Stmt::Return(v) => {
                if v.is_some() {
                    return type_err("a void method cannot return a value");
                }
                out.push(IrStmt::Return);
                let f = std::mem::replace(&mut self.flow, Flow::dead());
                self.exits.push(f);
                Ok(())
            }
            Stmt::Block(stmts) => self.with_scope(|l| {
                for s in stmts {
                    l.stmt(s, out, false)?;
                }
                Ok(())
            }),
        }
    }

    /// Lowers a loop. `prologue` runs at the start of each iteration and
    /// its definitions are in scope in the body.
    fn loop_stmt(
        &mut self,
        cond: Option<&Expr>,
        body: &Stmt,
        update: Option<&Stmt>,
        prologue: &[IrStmt],
        out: &mut Vec<IrStmt>,
    ) -> R<()> {
        let mut ctx = ExprCtx { no_effects: Some("a loop condition"), ..Default::default() };
        let mut pre = Vec::new();
        let (guard, t) = match cond {
            Some(c) => self.expr(c, &mut pre, &mut ctx)?,
            None => (IrExpr::Const(Value::Bool(true)), ETy::Bool),
        };
        debug_assert!(pre.is_empty());
        expect_bool(t, "loop condition")?;

        let id = self.loops.len();
        let scope: Vec<VarId> = self.scopes.iter().flatten().map(|&(_, v)| v).collect();
        self.loops.push(LoopRecord {
            id,
            invariant: format!("Inv{id}"),
            parent: self.loop_stack.last().copied(),
            traversal: self.traversal(&guard),
            scope,
        });
        let entry = self.flow.clone();
        self.loop_stack.push(id);
        let mut body_ir = prologue.to_vec();
        for s in prologue {
            if let IrStmt::Heap { op: HeapOp::Next { dst: Some(d), .. }, .. } = s {
                self.assign_var(*d);
            }
        }
        self.with_scope(|l| l.stmt(body, &mut body_ir, false))?;
        let mut update_ir = Vec::new();
        if let Some(u) = update {
            // `continue` reaches the update, so start from the loop entry state.
            let after_body = std::mem::replace(&mut self.flow, entry.clone());
            self.stmt(u, &mut update_ir, false)?;
            let _ = after_body;
        }
        self.loop_stack.pop();
        self.flow = entry;
        out.push(IrStmt::Loop { id, guard, body: body_ir, update: update_ir });
        Ok(())
    }

    fn traversal(&self, guard: &IrExpr) -> Traversal {
        if let IrExpr::HasNext { iter, .. } = guard {
            if let Some(&list) = self.iter_list.get(iter) {
                return Traversal::Iter { iter: *iter, list };
            }
        }
        let mut conjuncts = Vec::new();
        fn split<'a>(e: &'a IrExpr, out: &mut Vec<&'a IrExpr>) {
            match e {
                IrExpr::Binary(BinOp::And, l, r) => {
                    split(l, out);
                    split(r, out);
                }
                _ => out.push(e),
            }
        }
        split(guard, &mut conjuncts);
        for c in conjuncts {
            let (var, bound) = match c {
                IrExpr::Binary(BinOp::Lt, l, r) => (l.as_ref(), r.as_ref()),
                IrExpr::Binary(BinOp::Gt, l, r) => (r.as_ref(), l.as_ref()),
                _ => continue,
            };
            let IrExpr::Var(var) = var else { continue };
            let list = match bound {
                IrExpr::Size { list, .. } => *list,
                IrExpr::Binary(BinOp::Sub, s, k) => match (s.as_ref(), k.as_ref()) {
                    (IrExpr::Size { list, .. }, IrExpr::Const(Value::Int(k))) if *k >= 0 => *list,
                    _ => continue,
                },
                _ => continue,
            };
            if matches!(self.vars[*var].ty, Type::Int) {
                return Traversal::Index { var: *var, list };
            }
        }
        Traversal::Unknown
    }

    fn decl(&mut self, ty: Type, name: &str, init: Option<&Expr>, out: &mut Vec<IrStmt>, top: bool) -> R<()> {
        let v = self.declare(name, ty, VarKind::Temp)?;
        if top {
            self.top_level.push(v);
        }
        if let Some(e) = init {
            if top {
                self.vars[v].initial = match (ty, e) {
                    (Type::List, Expr::NewList(None)) => Some(Initial::EmptyList),
                    (Type::Int | Type::Integer, Expr::Int(k)) if i32::try_from(*k).is_ok() => {
                        Some(Initial::Scalar(Value::Int(*k as i32)))
                    }
                    (Type::Integer, Expr::Null) => Some(Initial::Scalar(Value::Null)),
                    (Type::Boolean, Expr::Bool(b)) => Some(Initial::Scalar(Value::Bool(*b))),
                    _ => None,
                };
            }
            self.assign_to(v, e, out, true)?;
        }
        Ok(())
    }

    /// `v = e` for any variable class.
    fn assign_to(&mut self, v: VarId, e: &Expr, out: &mut Vec<IrStmt>, is_decl: bool) -> R<()> {
        let name = self.vars[v].name.clone();
        match self.ty(v) {
            Type::List => {
                let op = match e {
                    Expr::NewList(None) => HeapOp::NewList { dst: v },
                    Expr::NewList(Some(src)) => {
                        let s = self.read_var(src)?;
                        if self.ty(s) != Type::List {
                            return type_err(format!("`new ArrayList<>({src})` needs a list"));
                        }
                        HeapOp::CopyList { dst: v, src: s }
                    }
                    Expr::Var(src) => {
                        let s = self.read_var(src)?;
                        if self.ty(s) != Type::List {
                            return type_err(format!("cannot assign `{src}` to list `{name}`"));
                        }
                        HeapOp::AliasList { dst: v, src: s }
                    }
                    Expr::Null => return unsupported(format!("null list reference `{name}`")),
                    _ => return type_err(format!("cannot assign this expression to list `{name}`")),
                };
                out.push(heap(op));
                self.assign_var(v);
                Ok(())
            }
            Type::Iterator => {
                let Expr::Call { recv, method: Method::Iterator, args } = e else {
                    return type_err(format!("iterator `{name}` must be bound by `iterator()`"));
                };
                if !args.is_empty() {
                    return type_err("`iterator()` takes no arguments");
                }
                let rebinds = Flow::get(&self.flow.may, v) || self.decl_loop_depth[v] < self.loop_depth();
                if !is_decl && rebinds {
                    return binding(format!("iterator `{name}` is bound more than once on a path"));
                }
                let list = self.read_var(recv)?;
                if self.ty(list) != Type::List {
                    return type_err(format!("`{recv}.iterator()` needs a list"));
                }
                self.iter_list.insert(v, list);
                out.push(heap(HeapOp::Iterator { dst: v, list }));
                self.assign_var(v);
                Ok(())
            }
            ty => {
                let target = ETy::of(ty);
                // A side-effecting call assigned directly needs no temporary.
                if let Expr::Call { recv, method, args } = e {
                    if self.is_effect(recv, *method)? {
                        if !target.numeric() {
                            return type_err(format!("cannot assign an int to `{name}`"));
                        }
                        let mut ctx = ExprCtx::default();
                        self.effect_call(recv, *method, args, Some(v), out, &mut ctx)?;
                        self.assign_var(v);
                        return Ok(());
                    }
                }
                let mut ctx = ExprCtx::default();
                let (value, t) = self.expr(e, out, &mut ctx)?;
                let value = coerce(value, t, target, &name)?;
                out.push(IrStmt::Assign { var: v, value });
                self.assign_var(v);
                Ok(())
            }
        }
    }

    /// Whether the call mutates the heap and yields an int.
    fn is_effect(&mut self, recv: &str, method: Method) -> R<bool> {
        let r = self.lookup(recv)?;
        Ok(matches!(
            (self.ty(r), method),
            (Type::Iterator, Method::Next) | (Type::List, Method::Remove | Method::Set)
        ))
    }

    /// Lowers a side-effecting collection call whose result goes to `dst`.
    /// Returns `None` if the call is not one of the value-producing effects.
    fn effect_call(
        &mut self,
        recv: &str,
        method: Method,
        args: &[Expr],
        dst: Option<VarId>,
        out: &mut Vec<IrStmt>,
        ctx: &mut ExprCtx,
    ) -> R<Option<()>> {
        let r = self.read_var(recv)?;
        if let Some(why) = ctx.no_effects {
            return unsupported(format!("side effect `{recv}.{}()` in {why}", method.name()));
        }
        let reads_before = ctx.reads;
        let op = match (self.ty(r), method) {
            (Type::Iterator, Method::Next) => {
                arity(args, 0, "next")?;
                HeapOp::Next { iter: r, dst }
            }
            (Type::List, Method::Remove) => {
                arity(args, 1, "remove")?;
                let index = self.index_arg(&args[0], out, ctx)?;
                HeapOp::RemoveAt { list: r, index, removed: dst }
            }
            (Type::List, Method::Set) => {
                arity(args, 2, "set")?;
                let index = self.index_arg(&args[0], out, ctx)?;
                let value = self.element_arg(&args[1], out, ctx)?;
                HeapOp::Set { list: r, index, value, old: dst }
            }
            _ => return Ok(None),
        };
        if ctx.effects > 0 || reads_before > 0 {
            return unsupported("an expression that mixes a side effect with other heap accesses");
        }
        ctx.effects += 1;
        out.push(heap(op));
        Ok(Some(()))
    }

    fn index_arg(&mut self, e: &Expr, out: &mut Vec<IrStmt>, ctx: &mut ExprCtx) -> R<IrExpr> {
        let (ie, t) = self.expr(e, out, ctx)?;
        match t {
            ETy::Int => Ok(ie),
            ETy::Integer => unsupported("`remove(Object)` and boxed indices"),
            _ => type_err("list index must be an int"),
        }
    }

    fn element_arg(&mut self, e: &Expr, out: &mut Vec<IrStmt>, ctx: &mut ExprCtx) -> R<IrExpr> {
        let (ie, t) = self.expr(e, out, ctx)?;
        match t {
            ETy::Int => Ok(ie),
            ETy::Integer | ETy::Null => type_err("list elements must be non-null ints"),
            _ => type_err("list elements must be ints"),
        }
    }

    fn call_stmt(&mut self, e: &Expr, out: &mut Vec<IrStmt>) -> R<()> {
        let Expr::Call { recv, method, args } = e else {
            return type_err("expression statement must be a call");
        };
        let mut ctx = ExprCtx::default();
        if self.effect_call(recv, *method, args, None, out, &mut ctx)?.is_some() {
            return Ok(());
        }
        let r = self.read_var(recv)?;
        let op = match (self.ty(r), method) {
            (Type::List, Method::Add) if args.len() == 1 => {
                let value = self.element_arg(&args[0], out, &mut ctx)?;
                HeapOp::AddLast { list: r, value }
            }
            (Type::List, Method::Add) if args.len() == 2 => {
                let index = self.index_arg(&args[0], out, &mut ctx)?;
                let value = self.element_arg(&args[1], out, &mut ctx)?;
                HeapOp::AddAt { list: r, index, value }
            }
            (Type::List, Method::Add) => return type_err("`add` takes one or two arguments"),
            (Type::List, Method::Clear) => {
                arity(args, 0, "clear")?;
                HeapOp::Clear { list: r }
            }
            (Type::Iterator, Method::Remove) => {
                arity(args, 0, "remove")?;
                HeapOp::IterRemove { iter: r }
            }
            (Type::List, Method::Size | Method::Get) | (Type::Iterator, Method::HasNext) => {
                // Evaluated for its faults only.
                let (value, t) = self.expr(e, out, &mut ctx)?;
                let tmp = self.temp(if t == ETy::Bool { Type::Boolean } else { Type::Int });
                out.push(IrStmt::Assign { var: tmp, value });
                self.assign_var(tmp);
                return Ok(());
            }
            (t, m) => return type_err(format!("`{}` is not a method of {t}", m.name())),
        };
        out.push(heap(op));
        Ok(())
    }

    fn expr(&mut self, e: &Expr, out: &mut Vec<IrStmt>, ctx: &mut ExprCtx) -> R<(IrExpr, ETy)> {
        match e {
            Expr::Int(v) => match i32::try_from(*v) {
                Ok(v) => Ok((IrExpr::Const(Value::Int(v)), ETy::Int)),
                Err(_) => type_err(format!("integer literal {v} out of range")),
            },
            Expr::Bool(b) => Ok((IrExpr::Const(Value::Bool(*b)), ETy::Bool)),
            Expr::Null => Ok((IrExpr::Const(Value::Null), ETy::Null)),
            Expr::Var(name) => {
                let v = self.read_var(name)?;
                match self.ty(v) {
                    Type::List | Type::Iterator => {
                        type_err(format!("reference `{name}` used as a value"))
                    }
                    t => Ok((IrExpr::Var(v), ETy::of(t))),
                }
            }
            Expr::NewList(_) => type_err("`new ArrayList` is only allowed as a list initializer"),
            Expr::Unary(op, inner) => {
                let (ie, t) = self.expr(inner, out, ctx)?;
                match op {
                    UnOp::Neg if t.numeric() => Ok((IrExpr::Unary(UnOp::Neg, Box::new(ie)), ETy::Int)),
                    UnOp::Not if t == ETy::Bool => Ok((IrExpr::Unary(UnOp::Not, Box::new(ie)), ETy::Bool)),
                    _ => type_err(format!("bad operand for unary `{}`", if *op == UnOp::Neg { "-" } else { "!" })),
                }
            }
            Expr::Binary(op, l, r) => {
                let (le, lt) = self.expr(l, out, ctx)?;
                let (re, rt) = if matches!(op, BinOp::And | BinOp::Or) {
                    let saved = ctx.no_effects;
                    ctx.no_effects = saved.or(Some("the right operand of `&&` or `||`"));
                    let r = self.expr(r, out, ctx);
                    ctx.no_effects = saved;
                    r?
                } else {
                    self.expr(r, out, ctx)?
                };
                let sym = op.symbol();
                let ty = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                        if !(lt.numeric() && rt.numeric()) {
                            return type_err(format!("`{sym}` needs int operands"));
                        }
                        ETy::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if !(lt.numeric() && rt.numeric()) {
                            return type_err(format!("`{sym}` needs int operands"));
                        }
                        ETy::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let ok = (lt.numeric() && rt.numeric())
                            || (lt == ETy::Bool && rt == ETy::Bool)
                            || (lt == ETy::Null && matches!(rt, ETy::Integer | ETy::Null))
                            || (rt == ETy::Null && lt == ETy::Integer);
                        if !ok {
                            return type_err(format!("`{sym}` on incompatible operands"));
                        }
                        ETy::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        if lt != ETy::Bool || rt != ETy::Bool {
                            return type_err(format!("`{sym}` needs boolean operands"));
                        }
                        ETy::Bool
                    }
                };
                if matches!(op, BinOp::Eq | BinOp::Ne) && lt == ETy::Integer && rt == ETy::Integer {
                    return unsupported("`==` between two `Integer` references");
                }
                // Mixed and arithmetic uses of `Integer` unbox, which faults on null.
                let unbox = |e: IrExpr, t: ETy| {
                    if t == ETy::Integer {
                        IrExpr::Unbox(Box::new(e))
                    } else {
                        e
                    }
                };
                let null_cmp = lt == ETy::Null || rt == ETy::Null;
                let (le, re) = if null_cmp { (le, re) } else { (unbox(le, lt), unbox(re, rt)) };
                Ok((IrExpr::Binary(*op, Box::new(le), Box::new(re)), ty))
            }
            Expr::Call { recv, method, args } => {
                if self.is_effect(recv, *method)? {
                    let tmp = self.temp(Type::Int);
                    self.effect_call(recv, *method, args, Some(tmp), out, ctx)?;
                    self.assign_var(tmp);
                    return Ok((IrExpr::Var(tmp), ETy::Int));
                }
                let r = self.read_var(recv)?;
                match (self.ty(r), method) {
                    (Type::List, Method::Size) => {
                        arity(args, 0, "size")?;
                        ctx.reads += 1;
                        Ok((IrExpr::Size { heap: HeapName::O, list: r }, ETy::Int))
                    }
                    (Type::List, Method::Get) => {
                        arity(args, 1, "get")?;
                        let index = self.index_arg(&args[0], out, ctx)?;
                        ctx.reads += 1;
                        Ok((IrExpr::Get { heap: HeapName::O, list: r, index: Box::new(index) }, ETy::Int))
                    }
                    (Type::Iterator, Method::HasNext) => {
                        arity(args, 0, "hasNext")?;
                        ctx.reads += 1;
                        Ok((IrExpr::HasNext { heap: HeapName::O, iter: r }, ETy::Bool))
                    }
                    (Type::List, Method::Add | Method::Clear) | (Type::Iterator, Method::Remove) => {
                        unsupported(format!("`{}` used as a value", method.name()))
                    }
                    (Type::List, Method::Iterator) => {
                        type_err("`iterator()` is only allowed as an iterator initializer")
                    }
                    (t, m) => type_err(format!("`{}` is not a method of {t}", m.name())),
                }
            }
        }
    }
}

fn arity(args: &[Expr], n: usize, name: &str) -> R<()> {
    if args.len() == n {
        Ok(())
    } else {
        type_err(format!("`{name}` takes {n} argument(s), got {}", args.len()))
    }
}

fn expect_bool(t: ETy, what: &str) -> R<()> {
    if t == ETy::Bool {
        Ok(())
    } else {
        type_err(format!("{what} must be boolean"))
    }
}

fn coerce(e: IrExpr, from: ETy, to: ETy, name: &str) -> R<IrExpr> {
    match (from, to) {
        (a, b) if a == b => Ok(e),
        (ETy::Integer, ETy::Int) => Ok(IrExpr::Unbox(Box::new(e))),
        (ETy::Int | ETy::Null, ETy::Integer) => Ok(e),
        _ => type_err(format!("cannot assign {from:?} to `{name}`")),
    }
}

fn heap(op: HeapOp) -> IrStmt {
    IrStmt::Heap { out: HeapName::O, input: HeapName::O, op }
}

fn has_heap_ops(stmts: &[IrStmt]) -> bool {
    stmts.iter().any(|s| match s {
        IrStmt::Heap { .. } => true,
        IrStmt::If { then, els, .. } => has_heap_ops(then) || has_heap_ops(els),
        IrStmt::Loop { body, update, .. } => has_heap_ops(body) || has_heap_ops(update),
        _ => false,
    })
}

/// Assigns heap names. Within a block, each maximal run of heap operations
/// not interrupted by a compound statement chains through primed names and
/// ends in `h_o`. A compound statement that touches the heap is entered
/// with `h_o`, inserting `h_o = copyHeap(h_i)` if nothing has run yet.
fn name_heaps(body: &mut Vec<IrStmt>) {
    let mut cur = HeapName::I;
    name_block(body, &mut cur);
}

fn name_block(stmts: &mut Vec<IrStmt>, cur: &mut HeapName) {
    let mut i = 0;
    while i < stmts.len() {
        let compound = matches!(stmts[i], IrStmt::If { .. } | IrStmt::Loop { .. });
        if compound {
            let touches = match &stmts[i] {
                IrStmt::If { then, els, .. } => has_heap_ops(then) || has_heap_ops(els),
                IrStmt::Loop { body, update, .. } => has_heap_ops(body) || has_heap_ops(update),
                _ => unreachable!(),
            };
            if touches && *cur == HeapName::I {
                stmts.insert(i, IrStmt::Heap { out: HeapName::O, input: HeapName::I, op: HeapOp::CopyHeap });
                *cur = HeapName::O;
                i += 1;
            }
            match &mut stmts[i] {
                IrStmt::If { cond, then, els } => {
                    rename_reads(cond, *cur);
                    let mut a = *cur;
                    name_block(then, &mut a);
                    let mut b = *cur;
                    name_block(els, &mut b);
                }
                IrStmt::Loop { guard, body, update, .. } => {
                    rename_reads(guard, *cur);
                    let mut a = *cur;
                    name_block(body, &mut a);
                    name_block(update, &mut a);
                }
                _ => unreachable!(),
            }
            if touches {
                *cur = HeapName::O;
            }
            i += 1;
            continue;
        }
        // A straight-line run up to the next compound or jump.
        let end = (i..stmts.len())
            .find(|&j| !matches!(stmts[j], IrStmt::Assign { .. } | IrStmt::Heap { .. }))
            .unwrap_or(stmts.len());
        let n_ops = stmts[i..end].iter().filter(|s| matches!(s, IrStmt::Heap { .. })).count();
        let mut k = 0;
        for s in &mut stmts[i..end] {
            match s {
                IrStmt::Assign { value, .. } => rename_reads(value, *cur),
                IrStmt::Heap { out, input, op } => {
                    rename_op_reads(op, *cur);
                    *input = *cur;
                    k += 1;
                    *out = if k == n_ops { HeapName::O } else { HeapName::primed(k as u8) };
                    *cur = *out;
                }
                _ => unreachable!(),
            }
        }
        i = end.max(i + 1);
    }
}

fn rename_op_reads(op: &mut HeapOp, h: HeapName) {
    match op {
        HeapOp::AddLast { value, .. } => rename_reads(value, h),
        HeapOp::AddAt { index, value, .. } | HeapOp::Set { index, value, .. } => {
            rename_reads(index, h);
            rename_reads(value, h);
        }
        HeapOp::RemoveAt { index, .. } => rename_reads(index, h),
        _ => {}
    }
}

fn rename_reads(e: &mut IrExpr, h: HeapName) {
    match e {
        IrExpr::Size { heap, .. } | IrExpr::HasNext { heap, .. } => *heap = h,
        IrExpr::Get { heap, index, .. } => {
            *heap = h;
            rename_reads(index, h);
        }
        IrExpr::Unary(_, x) | IrExpr::Unbox(x) => rename_reads(x, h),
        IrExpr::Binary(_, l, r) => {
            rename_reads(l, h);
            rename_reads(r, h);
        }
        IrExpr::Const(_) | IrExpr::Var(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::super::{compile, FrontendError};
    use super::*;

    fn ir(src: &str) -> IrProgram {
        compile(src).unwrap().1
    }

    #[test]
    fn single_add_is_one_heap_op() {
        let p = ir("void f(List<Integer> l) { l.add(5); }");
        assert!(p.loops.is_empty());
        assert_eq!(p.to_string(), "void f(List<Integer> l) {\n  h_o = add_last(h_i, l, 5);\n}\n");
    }

    #[test]
    fn filter_map_loop_names_heaps() {
        let p = ir("void f(List<Integer> list) { Iterator<Integer> it = list.iterator(); \
                    List<Integer> out = new ArrayList<>(); \
                    while (it.hasNext()) { int el = it.next(); if (el > 0) out.add(2 * el); } }");
        let text = p.to_string();
        assert!(text.contains("(it, h_o') = iterator(h_i, list);"), "{text}");
        assert!(text.contains("h_o = new(h_o', out);"), "{text}");
        assert!(text.contains("while (hasNext(h_o, it))"), "{text}");
        assert!(text.contains("h_o = add_last(h_o, out, (2 * el));"), "{text}");
        let names: Vec<&str> = p.outputs.iter().map(|&v| p.vars[v].name.as_str()).collect();
        assert_eq!(names, ["list", "out"]);
        assert_eq!(p.loops[0].traversal, Traversal::Iter { iter: 0 + 1, list: 0 });
    }

    #[test]
    fn nested_loops_copy_heap_first() {
        let p = ir("void s(List<Integer> l) { int min, temp; \
                    for (int j = 0; j < l.size() - 1; j++) { min = j; \
                    for (int i = j + 1; i < l.size(); i++) if (l.get(i) < l.get(min)) min = i; \
                    temp = l.get(j); l.set(j, l.get(min)); l.set(min, temp); } }");
        assert_eq!(p.loops.len(), 2);
        assert_eq!(p.loops[1].parent, Some(0));
        let text = p.to_string();
        assert!(text.contains("h_o = copyHeap(h_i);"), "{text}");
        assert!(text.contains("h_o' = set(h_o, l, j, get(h_o, l, min));"), "{text}");
        assert!(text.contains("h_o = set(h_o', l, min, temp);"), "{text}");
        // `min` and `temp` are not assigned when the list is short.
        assert_eq!(p.outputs, vec![0]);
    }

    #[test]
    fn unbound_iterator_is_a_binding_error() {
        let e = compile("void f(List<Integer> l) { Iterator<Integer> it; while (it.hasNext()) it.next(); }");
        assert!(matches!(e, Err(FrontendError::Binding(_))), "{e:?}");
    }

    #[test]
    fn only_referenced_params_are_kept() {
        let p = ir("void f(List<Integer> a, int k, List<Integer> b) { b.add(1); }");
        let names: Vec<&str> = p.params.iter().map(|&v| p.vars[v].name.as_str()).collect();
        assert_eq!(names, ["b"]);
    }

    #[test]
    fn effects_in_guards_are_rejected() {
        let e = compile("void f(List<Integer> l) { Iterator<Integer> it = l.iterator(); while (it.hasNext() && it.next() > 0) {} }");
        assert!(matches!(e, Err(FrontendError::UnsupportedIr(_))), "{e:?}");
    }

    #[test]
    fn definite_assignment_decides_outputs() {
        let p = ir("void f(List<Integer> l) { int s = 0; int t; Integer r = null; \
                    for (int v : l) { s += v; t = v; } }");
        let names: Vec<&str> = p.outputs.iter().map(|&v| p.vars[v].name.as_str()).collect();
        assert_eq!(names, ["l", "s", "r"]);
    }
}
