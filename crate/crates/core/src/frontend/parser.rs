//! Recursive-descent parser for MiniJ.
//!
//! ```text
//! program := modifier* "void" ident "(" [param ("," param)*] ")" block
//! param   := type ident
//! stmt    := decl | assign ";" | call ";" | "if" "(" expr ")" stmt ["else" stmt]
//!          | "while" "(" expr ")" stmt | "for" "(" [init] ";" [expr] ";" [update] ")" stmt
//!          | "for" "(" type ident ":" ident ")" stmt
//!          | "break" ";" | "continue" ";" | "return" [expr] ";" | block
//! ```

use super::ast::{AssignOp, BinOp, Expr, Method, Param, Program, Stmt, Type, UnOp};
use super::lexer::{tokenize, Pos, Tok, Token};
use super::FrontendError;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "class",
    "interface",
    "enum",
    "try",
    "catch",
    "finally",
    "throw",
    "throws",
    "switch",
    "case",
    "default",
    "do",
    "synchronized",
    "this",
    "super",
    "instanceof",
    "import",
    "package",
    "String",
    "double",
    "float",
    "long",
    "short",
    "byte",
    "char",
    "var",
    "assert",
    "Set",
    "HashSet",
    "Map",
    "HashMap",
    "ListIterator",
];

const MODIFIERS: &[&str] = &["public", "private", "protected", "static", "final"];

pub fn parse(source: &str) -> Result<Program, FrontendError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, at: 0 };
    let program = p.program()?;
    p.expect_eof()?;
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.at].tok.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, name: &str) -> bool {
        if self.is_ident(name) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, FrontendError> {
        let pos = self.pos();
        if let Tok::Ident(s) = self.peek() {
            if UNSUPPORTED_KEYWORDS.contains(&s.as_str()) {
                return Err(FrontendError::Unsupported {
                    line: pos.line,
                    col: pos.col,
                    construct: format!("`{s}`"),
                });
            }
        }
        Err(FrontendError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn unsupported<T>(&self, construct: impl Into<String>) -> Result<T, FrontendError> {
        let pos = self.pos();
        Err(FrontendError::Unsupported { line: pos.line, col: pos.col, construct: construct.into() })
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&[&format!("`{p}`")])
        }
    }

    fn expect_ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) if !UNSUPPORTED_KEYWORDS.contains(&s.as_str()) && !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn expect_eof(&mut self) -> Result<(), FrontendError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    fn program(&mut self) -> Result<Program, FrontendError> {
        while MODIFIERS.iter().any(|m| self.is_ident(m)) {
            self.bump();
        }
        if !self.eat_ident("void") {
            return self.error(&["`void`"]);
        }
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                self.eat_ident("final");
                let ty = match self.try_type()? {
                    Some(t) => t,
                    None => return self.error(&["parameter type"]),
                };
                let name = self.expect_ident()?;
                params.push(Param { ty, name });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = match self.block()? {
            Stmt::Block(b) => b,
            _ => unreachable!(),
        };
        Ok(Program { name, params, body })
    }

    /// Parses a type if one starts here. Generic arguments must be `Integer`.
    fn try_type(&mut self) -> Result<Option<Type>, FrontendError> {
        let name = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Ok(None),
        };
        let ty = match name.as_str() {
            "int" => Type::Int,
            "boolean" => Type::Boolean,
            "Integer" => {
                // `Integer.MIN_VALUE` is an expression, not a type.
                if matches!(self.peek_at(1), Tok::Punct(".")) {
                    return Ok(None);
                }
                Type::Integer
            }
            "List" | "ArrayList" | "LinkedList" | "Collection" => Type::List,
            "Iterator" => Type::Iterator,
            _ => return Ok(None),
        };
        self.bump();
        if matches!(ty, Type::List | Type::Iterator) {
            self.expect_punct("<")?;
            if !self.eat_ident("Integer") {
                return self.unsupported("generic arguments other than `Integer`");
            }
            self.expect_punct(">")?;
        }
        if self.is_punct("[") {
            return self.unsupported("arrays");
        }
        Ok(Some(ty))
    }

    fn starts_decl(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "int" | "boolean" => true,
                "Integer" => !matches!(self.peek_at(1), Tok::Punct(".")),
                "List" | "ArrayList" | "LinkedList" | "Collection" | "Iterator" => {
                    matches!(self.peek_at(1), Tok::Punct("<"))
                }
                "final" => true,
                _ => false,
            },
            _ => false,
        }
    }

    fn block(&mut self) -> Result<Stmt, FrontendError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.error(&["`}`"]);
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Stmt::Block(stmts))
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        if self.is_punct("{") {
            return self.block();
        }
        if self.eat_punct(";") {
            return Ok(Stmt::Block(Vec::new()));
        }
        if self.eat_ident("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then = Box::new(self.stmt()?);
            let els = if self.eat_ident("else") { Some(Box::new(self.stmt()?)) } else { None };
            return Ok(Stmt::If { cond, then, els });
        }
        if self.eat_ident("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::While { cond, body });
        }
        if self.eat_ident("for") {
            return self.for_stmt();
        }
        if self.eat_ident("break") {
            self.expect_punct(";")?;
            return Ok(Stmt::Break);
        }
        if self.eat_ident("continue") {
            self.expect_punct(";")?;
            return Ok(Stmt::Continue);
        }
        if self.eat_ident("return") {
            let value = if self.is_punct(";") { None } else { Some(self.expr()?) };
            self.expect_punct(";")?;
            return Ok(Stmt::Return(value));
        }
        if self.starts_decl() {
            let d = self.decl()?;
            self.expect_punct(";")?;
            return Ok(d);
        }
        let s = self.simple()?;
        self.expect_punct(";")?;
        Ok(s)
    }

    fn for_stmt(&mut self) -> Result<Stmt, FrontendError> {
        self.expect_punct("(")?;
        // Enhanced for: `for (int el : list)`.
        let save = self.at;
        self.eat_ident("final");
        if let Some(ty) = self.try_type()? {
            if let Tok::Ident(var) = self.peek().clone() {
                if matches!(self.peek_at(1), Tok::Punct(":")) {
                    if !matches!(ty, Type::Int | Type::Integer) {
                        return self.unsupported("enhanced for over non-integer elements");
                    }
                    self.bump();
                    self.bump();
                    let list = self.expect_ident()?;
                    self.expect_punct(")")?;
                    let body = Box::new(self.stmt()?);
                    return Ok(Stmt::ForEach { var, list, body });
                }
            }
        }
        self.at = save;

        let init = if self.is_punct(";") {
            None
        } else if self.starts_decl() {
            Some(Box::new(self.decl()?))
        } else {
            Some(Box::new(self.simple()?))
        };
        self.expect_punct(";")?;
        let cond = if self.is_punct(";") { None } else { Some(self.expr()?) };
        self.expect_punct(";")?;
        let update = if self.is_punct(")") { None } else { Some(Box::new(self.simple()?)) };
        self.expect_punct(")")?;
        let body = Box::new(self.stmt()?);
        Ok(Stmt::For { init, cond, update, body })
    }

    fn decl(&mut self) -> Result<Stmt, FrontendError> {
        self.eat_ident("final");
        let ty = match self.try_type()? {
            Some(t) => t,
            None => return self.error(&["type"]),
        };
        let mut vars = Vec::new();
        loop {
            let name = self.expect_ident()?;
            if self.is_punct("[") {
                return self.unsupported("arrays");
            }
            let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
            vars.push((name, init));
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(Stmt::Decl { ty, vars })
    }

    /// Assignment, increment, or call statement (no trailing `;`).
    fn simple(&mut self) -> Result<Stmt, FrontendError> {
        if self.is_punct("++") || self.is_punct("--") {
            let increment = self.is_punct("++");
            self.bump();
            let target = self.expect_ident()?;
            return Ok(Stmt::Step { target, increment });
        }
        let Tok::Ident(name) = self.peek().clone() else {
            return self.error(&["statement"]);
        };
        match self.peek_at(1).clone() {
            Tok::Punct(op @ ("=" | "+=" | "-=" | "*=")) => {
                let target = self.expect_ident()?;
                self.bump();
                let op = match op {
                    "=" => AssignOp::Set,
                    "+=" => AssignOp::Add,
                    "-=" => AssignOp::Sub,
                    _ => AssignOp::Mul,
                };
                let value = self.expr()?;
                Ok(Stmt::Assign { target, op, value })
            }
            Tok::Punct("/=" | "%=") => {
                self.bump();
                self.unsupported("compound assignment `/=` or `%=`")
            }
            Tok::Punct(op @ ("++" | "--")) => {
                let target = self.expect_ident()?;
                self.bump();
                Ok(Stmt::Step { target, increment: op == "++" })
            }
            Tok::Punct(".") => {
                let e = self.postfix()?;
                if !matches!(e, Expr::Call { .. }) {
                    return self.error(&["method call"]);
                }
                Ok(Stmt::Expr(e))
            }
            _ => {
                if UNSUPPORTED_KEYWORDS.contains(&name.as_str()) {
                    return self.error(&["statement"]);
                }
                self.bump();
                self.error(&["`=`", "`+=`", "`++`", "`.`"])
            }
        }
    }

    pub fn expr(&mut self) -> Result<Expr, FrontendError> {
        let e = self.binary(1)?;
        if self.is_punct("?") {
            return self.unsupported("conditional expression `?:`");
        }
        Ok(e)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Punct(p) => match *p {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "%" => BinOp::Rem,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                "==" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "&&" => BinOp::And,
                "||" => BinOp::Or,
                _ => return None,
            },
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        if self.is_punct("&") || self.is_punct("|") || self.is_punct("^") {
            return self.unsupported("bitwise operators");
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        if self.eat_punct("-") {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Int(v) => Expr::Int(-v),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.eat_punct("+") {
            return self.unary();
        }
        if self.eat_punct("!") {
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        if self.is_punct("++") || self.is_punct("--") {
            return self.unsupported("increment inside an expression");
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let e = self.primary()?;
        if self.is_punct("++") || self.is_punct("--") {
            return self.unsupported("increment inside an expression");
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Punct("(") => {
                self.bump();
                if self.starts_decl() {
                    return self.unsupported("casts");
                }
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    self.bump();
                    Ok(Expr::Bool(false))
                }
                "null" => {
                    self.bump();
                    Ok(Expr::Null)
                }
                "new" => self.new_list(),
                "Integer" => {
                    self.bump();
                    self.expect_punct(".")?;
                    let field = self.expect_ident()?;
                    match field.as_str() {
                        "MIN_VALUE" => Ok(Expr::Int(i32::MIN as i64)),
                        "MAX_VALUE" => Ok(Expr::Int(i32::MAX as i64)),
                        "valueOf" => {
                            self.expect_punct("(")?;
                            let e = self.expr()?;
                            self.expect_punct(")")?;
                            Ok(e)
                        }
                        _ => self.unsupported(format!("`Integer.{field}`")),
                    }
                }
                _ => {
                    let recv = self.expect_ident()?;
                    if !self.is_punct(".") {
                        if self.is_punct("(") {
                            return self.unsupported(format!("call to user method `{recv}`"));
                        }
                        return Ok(Expr::Var(recv));
                    }
                    self.bump();
                    let mname = self.expect_ident()?;
                    let Some(method) = Method::from_name(&mname) else {
                        return self.unsupported(format!("method `{recv}.{mname}`"));
                    };
                    self.expect_punct("(")?;
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    // Unboxing is implicit in MiniJ.
                    while self.is_punct(".") && matches!(self.peek_at(1), Tok::Ident(s) if s == "intValue")
                    {
                        self.bump();
                        self.bump();
                        self.expect_punct("(")?;
                        self.expect_punct(")")?;
                    }
                    if self.is_punct(".") {
                        return self.unsupported("chained method calls");
                    }
                    Ok(Expr::Call { recv, method, args })
                }
            },
            _ => self.error(&["expression"]),
        }
    }

    fn new_list(&mut self) -> Result<Expr, FrontendError> {
        self.bump();
        match self.peek() {
            Tok::Ident(s) if matches!(s.as_str(), "ArrayList" | "LinkedList") => {
                self.bump();
            }
            _ => return self.unsupported("`new` of a non-list type"),
        }
        self.expect_punct("<")?;
        if !self.is_punct(">") && !self.eat_ident("Integer") {
            return self.unsupported("generic arguments other than `Integer`");
        }
        self.expect_punct(">")?;
        self.expect_punct("(")?;
        let copy = if self.is_punct(")") { None } else { Some(self.expect_ident()?) };
        self.expect_punct(")")?;
        Ok(Expr::NewList(copy))
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "if" | "else"
            | "while"
            | "for"
            | "break"
            | "continue"
            | "return"
            | "new"
            | "true"
            | "false"
            | "null"
            | "void"
            | "int"
            | "boolean"
    )
}
