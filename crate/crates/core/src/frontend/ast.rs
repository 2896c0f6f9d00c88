//! Surface syntax of MiniJ, the Java subset accepted by the refactoring
//! engine. One file holds one `void` method.

use std::fmt;

/// Declared type of a MiniJ variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Boolean,
    /// Boxed, nullable `Integer`.
    Integer,
    List,
    Iterator,
}

impl Type {
    pub fn is_scalar(self) -> bool {
        matches!(self, Type::Int | Type::Boolean | Type::Integer)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Boolean => "boolean",
            Type::Integer => "Integer",
            Type::List => "List<Integer>",
            Type::Iterator => "Iterator<Integer>",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: Type,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// `int a = 1, b;`: every declarator shares the type.
    Decl {
        ty: Type,
        vars: Vec<(String, Option<Expr>)>,
    },
    Assign {
        target: String,
        op: AssignOp,
        value: Expr,
    },
    /// `x++`, `x--`, `++x`, `--x` used as a statement.
    Step {
        target: String,
        increment: bool,
    },
    /// A call evaluated for its effect, e.g. `it.remove();`.
    Expr(Expr),
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Box<Stmt>>,
        body: Box<Stmt>,
    },
    /// Enhanced for: `for (int el : list) body`.
    ForEach {
        var: String,
        list: String,
        body: Box<Stmt>,
    },
    Break,
    Continue,
    Return(Option<Expr>),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

/// Collection API methods understood by MiniJ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Size,
    Get,
    Set,
    Add,
    Clear,
    Remove,
    Iterator,
    HasNext,
    Next,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Size => "size",
            Method::Get => "get",
            Method::Set => "set",
            Method::Add => "add",
            Method::Clear => "clear",
            Method::Remove => "remove",
            Method::Iterator => "iterator",
            Method::HasNext => "hasNext",
            Method::Next => "next",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Some(match name {
            "size" => Method::Size,
            "get" => Method::Get,
            "set" => Method::Set,
            "add" => Method::Add,
            "clear" => Method::Clear,
            "remove" => Method::Remove,
            "iterator" => Method::Iterator,
            "hasNext" => Method::HasNext,
            "next" => Method::Next,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Null,
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call {
        recv: String,
        method: Method,
        args: Vec<Expr>,
    },
    /// `new ArrayList<>()` or the copy constructor `new ArrayList<>(x)`.
    NewList(Option<String>),
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Visits this expression and all sub-expressions, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }
}
