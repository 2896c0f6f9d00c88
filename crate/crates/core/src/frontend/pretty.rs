//! Source printer for the MiniJ AST. The output reparses to an equal AST.

use super::ast::{Expr, Program, Stmt, UnOp};
use std::fmt::Write;

pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    let params: Vec<String> = p.params.iter().map(|q| format!("{} {}", q.ty, q.name)).collect();
    let _ = writeln!(out, "void {}({}) {{", p.name, params.join(", "));
    for s in &p.body {
        stmt(&mut out, s, 1);
    }
    out.push_str("}\n");
    out
}

/// One statement at the given depth, with a trailing newline.
pub fn stmt_text(s: &Stmt, depth: usize) -> String {
    let mut out = String::new();
    stmt(&mut out, s, depth);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Statement text without indentation or trailing `;`, for `for` headers.
fn simple(s: &Stmt) -> String {
    match s {
        Stmt::Decl { ty, vars } => {
            let parts: Vec<String> = vars
                .iter()
                .map(|(n, init)| match init {
                    Some(e) => format!("{n} = {}", expr(e)),
                    None => n.clone(),
                })
                .collect();
            format!("{ty} {}", parts.join(", "))
        }
        Stmt::Assign { target, op, value } => format!("{target} {} {}", op.symbol(), expr(value)),
        Stmt::Step { target, increment } => {
            format!("{target}{}", if *increment { "++" } else { "--" })
        }
        Stmt::Expr(e) => expr(e),
        _ => unreachable!("not a simple statement"),
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Decl { .. } | Stmt::Assign { .. } | Stmt::Step { .. } | Stmt::Expr(_) => {
            indent(out, depth);
            out.push_str(&simple(s));
            out.push_str(";\n");
        }
        Stmt::If { cond, then, els } => {
            indent(out, depth);
            let _ = write!(out, "if ({})", expr(cond));
            let braced = body(out, then, depth);
            if let Some(e) = els {
                if braced {
                    out.push_str(" else");
                } else {
                    indent(out, depth);
                    out.push_str("else");
                }
                if body(out, e, depth) {
                    out.push('\n');
                }
            } else if braced {
                out.push('\n');
            }
        }
        Stmt::While { cond, body: b } => {
            indent(out, depth);
            let _ = write!(out, "while ({})", expr(cond));
            if body(out, b, depth) {
                out.push('\n');
            }
        }
        Stmt::For { init, cond, update, body: b } => {
            indent(out, depth);
            let _ = write!(
                out,
                "for ({}; {}; {})",
                init.as_deref().map(simple).unwrap_or_default(),
                cond.as_ref().map(expr).unwrap_or_default(),
                update.as_deref().map(simple).unwrap_or_default()
            );
            if body(out, b, depth) {
                out.push('\n');
            }
        }
        Stmt::ForEach { var, list, body: b } => {
            indent(out, depth);
            let _ = write!(out, "for (int {var} : {list})");
            if body(out, b, depth) {
                out.push('\n');
            }
        }
        Stmt::Break => {
            indent(out, depth);
            out.push_str("break;\n");
        }
        Stmt::Continue => {
            indent(out, depth);
            out.push_str("continue;\n");
        }
        Stmt::Return(v) => {
            indent(out, depth);
            match v {
                Some(e) => {
                    let _ = writeln!(out, "return {};", expr(e));
                }
                None => out.push_str("return;\n"),
            }
        }
        Stmt::Block(stmts) => {
            indent(out, depth);
            out.push_str("{\n");
            for s in stmts {
                stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
    }
}

/// Prints the body of a compound statement after its header. Braces are
/// kept exactly where the source had a block; returns whether it did.
fn body(out: &mut String, s: &Stmt, depth: usize) -> bool {
    match s {
        Stmt::Block(stmts) => {
            out.push_str(" {\n");
            for s in stmts {
                stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push('}');
            true
        }
        other => {
            out.push('\n');
            stmt(out, other, depth + 1);
            false
        }
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(v) => v.to_string(),
        Expr::Bool(b) => b.to_string(),
        Expr::Null => "null".into(),
        Expr::Var(v) => v.clone(),
        Expr::Unary(op, inner) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            match inner.as_ref() {
                Expr::Binary(..) | Expr::Unary(..) | Expr::Int(_) => format!("{sym}({})", expr(inner)),
                _ => format!("{sym}{}", expr(inner)),
            }
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let lhs = match l.as_ref() {
                Expr::Binary(lop, ..) if lop.precedence() < p => format!("({})", expr(l)),
                _ => expr(l),
            };
            let rhs = match r.as_ref() {
                Expr::Binary(rop, ..) if rop.precedence() <= p => format!("({})", expr(r)),
                _ => expr(r),
            };
            format!("{lhs} {} {rhs}", op.symbol())
        }
        Expr::Call { recv, method, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{recv}.{}({})", method.name(), args.join(", "))
        }
        Expr::NewList(None) => "new ArrayList<>()".into(),
        Expr::NewList(Some(src)) => format!("new ArrayList<>({src})"),
    }
}
