//! A syntax-driven baseline: three fixed loop shapes rewritten by
//! template, with no reasoning about what the loop computes.
//!
//! 1. `for (int i = 0; i < l.size(); i++) if (c) out.add(e);` where `c`
//!    and `e` read `l` only as `l.get(i)`.
//! 2. An iterator loop whose body is `int x = it.next(); if (c) out.add(e);`.
//! 3. An iterator loop whose body is `if (c(it.next())) it.remove();`.

use crate::frontend::ast::{AssignOp, BinOp, Expr, Method, Program, Stmt, Type, UnOp};
use crate::frontend::pretty::{expr, stmt_text};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Baseline {
    Rewritten(String),
    NoMatch,
}

/// Rewrites the first loop that matches a template.
pub fn emit_pattern_baseline(p: &Program) -> Baseline {
    let body = &p.body;
    for (k, s) in body.iter().enumerate() {
        // Statements to drop, and the rewrite that takes the loop's place.
        let (dropped, text) = if let Some(t) = indexed_filter_map(s) {
            (None, t)
        } else if let Some((j, t)) = (0..k).rev().find_map(|j| iterator_loop(&body[j], s).map(|t| (j, t))) {
            (Some(j), t)
        } else {
            continue;
        };
        let mut out = String::from("// import java.util.ArrayList;\n// import java.util.List;\n");
        let params: Vec<String> = p.params.iter().map(|q| format!("{} {}", q.ty, q.name)).collect();
        out.push_str(&format!("void {}({}) {{\n", p.name, params.join(", ")));
        for (j, s) in body.iter().enumerate() {
            if j == k {
                for line in &text {
                    out.push_str(&format!("  {line};\n"));
                }
            } else if Some(j) != dropped {
                out.push_str(&stmt_text(s, 1));
            }
        }
        out.push_str("}\n");
        return Baseline::Rewritten(out);
    }
    Baseline::NoMatch
}

/// Unwraps a block holding exactly one statement.
fn single(s: &Stmt) -> &Stmt {
    match s {
        Stmt::Block(v) if v.len() == 1 => single(&v[0]),
        other => other,
    }
}

/// Replaces every occurrence of `pat` in `e` by the lambda variable;
/// `None` if `e` has any other variable or call.
fn abstract_over(e: &Expr, pat: &Expr) -> Option<Expr> {
    if e == pat {
        return Some(Expr::Var("v".into()));
    }
    Some(match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Null => e.clone(),
        Expr::Unary(op, x) => Expr::Unary(*op, Box::new(abstract_over(x, pat)?)),
        Expr::Binary(op, l, r) => Expr::Binary(*op, Box::new(abstract_over(l, pat)?), Box::new(abstract_over(r, pat)?)),
        Expr::Var(_) | Expr::Call { .. } | Expr::NewList(_) => return None,
    })
}

/// `if (c) out.add(e)` as (filter lambda, map lambda, out).
fn filter_add(s: &Stmt, elem: &Expr) -> Option<(String, Option<String>, String)> {
    let Stmt::If { cond, then, els: None } = single(s) else {
        return None;
    };
    let Stmt::Expr(Expr::Call { recv, method: Method::Add, args }) = single(then) else {
        return None;
    };
    let [value] = args.as_slice() else {
        return None;
    };
    let c = abstract_over(cond, elem)?;
    let e = abstract_over(value, elem)?;
    let map = (e != Expr::Var("v".into())).then(|| format!("v -> {}", expr(&e)));
    Some((format!("v -> {}", expr(&c)), map, recv.clone()))
}

fn call(recv: &str, method: Method, args: Vec<Expr>) -> Expr {
    Expr::Call { recv: recv.to_string(), method, args }
}

fn filter_map_text(list: &str, filter: String, map: Option<String>, out: &str) -> Vec<String> {
    let mut s = format!("{list}.stream().filter({filter})");
    if let Some(m) = map {
        s.push_str(&format!(".map({m})"));
    }
    s.push_str(&format!(".forEachOrdered({out}::add)"));
    vec![s]
}

fn indexed_filter_map(s: &Stmt) -> Option<Vec<String>> {
    let Stmt::For { init: Some(init), cond: Some(cond), update: Some(update), body } = s else {
        return None;
    };
    let Stmt::Decl { ty: Type::Int, vars } = init.as_ref() else {
        return None;
    };
    let [(i, Some(Expr::Int(0)))] = vars.as_slice() else {
        return None;
    };
    let Expr::Binary(BinOp::Lt, lhs, rhs) = cond else {
        return None;
    };
    if **lhs != Expr::Var(i.clone()) {
        return None;
    }
    let Expr::Call { recv: list, method: Method::Size, args } = rhs.as_ref() else {
        return None;
    };
    if !args.is_empty() {
        return None;
    }
    let steps = match update.as_ref() {
        Stmt::Step { target, increment: true } => target == i,
        Stmt::Assign { target, op: AssignOp::Add, value: Expr::Int(1) } => target == i,
        _ => false,
    };
    if !steps {
        return None;
    }
    let elem = call(list, Method::Get, vec![Expr::Var(i.clone())]);
    let (filter, map, out) = filter_add(body, &elem)?;
    Some(filter_map_text(list, filter, map, &out))
}

/// `Iterator<Integer> it = l.iterator();` and a later loop over `it`.
fn iterator_loop(decl: &Stmt, lp: &Stmt) -> Option<Vec<String>> {
    let Stmt::Decl { ty: Type::Iterator, vars } = decl else {
        return None;
    };
    let [(it, Some(Expr::Call { recv: list, method: Method::Iterator, args }))] = vars.as_slice() else {
        return None;
    };
    if !args.is_empty() {
        return None;
    }
    let Stmt::While { cond, body } = lp else {
        return None;
    };
    if *cond != call(it, Method::HasNext, vec![]) {
        return None;
    }
    let next = call(it, Method::Next, vec![]);
    // Template 3: `if (c(it.next())) it.remove();`
    if let Stmt::If { cond, then, els: None } = single(body) {
        if *single(then) == Stmt::Expr(call(it, Method::Remove, vec![])) {
            let c = abstract_over(cond, &next)?;
            let keep = Expr::Unary(UnOp::Not, Box::new(c));
            return Some(vec![
                format!("List<Integer> copy = new ArrayList<>({list})"),
                format!("{list}.clear()"),
                format!("copy.stream().filter(v -> {}).forEachOrdered({list}::add)", expr(&keep)),
            ]);
        }
    }
    // Template 2: `int x = it.next(); if (c(x)) out.add(e(x));`
    let Stmt::Block(stmts) = body.as_ref() else {
        return None;
    };
    let [Stmt::Decl { ty: Type::Int | Type::Integer, vars }, rest] = stmts.as_slice() else {
        return None;
    };
    let [(x, Some(init))] = vars.as_slice() else {
        return None;
    };
    if *init != next {
        return None;
    }
    let (filter, map, out) = filter_add(rest, &Expr::Var(x.clone()))?;
    Some(filter_map_text(list, filter, map, &out))
}
