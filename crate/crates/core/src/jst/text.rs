//! Line-oriented text form of output terms.
//!
//! ```text
//! list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList
//! data.stream().filter(v -> v % 2 == 0).findFirst().orElse(null) => result
//! l.stream().reduce(0, Integer::sum) => sum
//! copy.stream().skip(l.size()).forEachOrdered(p::add)
//! out.add(5)
//! ```
//!
//! `=> x` makes the pipeline the new contents (or value) of `x`;
//! `forEachOrdered(x::add)` appends to `x`.

use super::{AccOp, Atom, CmpOp, Count, Mapper, OutputTerm, Pipeline, Pred, Stage, Terminal};
use crate::frontend::ir::Value;
use crate::frontend::lexer::{tokenize, Tok, Token};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextError {
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("unknown list `{0}`")]
    UnknownList(String),
    #[error("{0}")]
    Lex(String),
}

/// One parsed line: the output it defines and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLine {
    pub target: String,
    pub term: OutputTerm,
}

fn count_text(c: Count, names: &[String]) -> String {
    match c {
        Count::Lit(n) => n.to_string(),
        Count::SizeOf(s) => format!("{}.size()", names[s]),
    }
}

pub fn stage_text(s: &Stage, names: &[String]) -> String {
    match s {
        Stage::Filter(p) => format!(".filter({p})"),
        Stage::Map(m) => format!(".map({m})"),
        Stage::Sorted => ".sorted()".to_string(),
        Stage::Skip(c) => format!(".skip({})", count_text(*c, names)),
        Stage::Limit(c) => format!(".limit({})", count_text(*c, names)),
    }
}

pub fn terminal_text(t: &Terminal) -> String {
    match t {
        Terminal::Reduce { identity, op } => format!(".reduce({identity}, {op})"),
        Terminal::Max { default } => format!(".max(Integer::compare).orElse({default})"),
        Terminal::Min { default } => format!(".min(Integer::compare).orElse({default})"),
        Terminal::FindFirst { default } => format!(".findFirst().orElse({default})"),
        Terminal::AllMatch(p) => format!(".allMatch({p})"),
        Terminal::AnyMatch(p) => format!(".anyMatch({p})"),
        Terminal::Count => ".count()".to_string(),
    }
}

pub fn pipeline_text(p: &Pipeline, names: &[String]) -> String {
    let mut s = format!("{}.stream()", names[p.source]);
    for st in &p.stages {
        s.push_str(&stage_text(st, names));
    }
    s
}

impl OutputTerm {
    /// The term as one line for output `target`; `None` when unchanged.
    pub fn to_line(&self, target: &str, names: &[String]) -> Option<String> {
        let mut s = String::new();
        match self {
            OutputTerm::Unchanged => return None,
            OutputTerm::Replace(p) => write!(s, "{} => {target}", pipeline_text(p, names)),
            OutputTerm::Append(p) => write!(s, "{}.forEachOrdered({target}::add)", pipeline_text(p, names)),
            OutputTerm::AddLast(c) => write!(s, "{target}.add({c})"),
            OutputTerm::Scalar(p, t) => write!(s, "{}{} => {target}", pipeline_text(p, names), terminal_text(t)),
        }
        .expect("writing to a string");
        Some(s)
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    i: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, expected: &str) -> Result<T, TextError> {
        let t = &self.toks[self.i];
        Err(TextError::Syntax {
            line: t.pos.line,
            col: t.pos.col,
            expected: expected.to_string(),
            found: t.tok.describe(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), TextError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(&format!("`{p}`"))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn keyword(&mut self, name: &str) -> Result<(), TextError> {
        if self.is_ident(name) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{name}`"))
        }
    }

    fn ident(&mut self) -> Result<String, TextError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn int(&mut self) -> Result<i64, TextError> {
        let neg = self.eat("-");
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                let v = if neg { -v } else { v };
                if i32::try_from(v).is_err() {
                    return self.err("a 32-bit integer");
                }
                Ok(v)
            }
            _ => self.err("integer"),
        }
    }

    fn list(&mut self) -> Result<usize, TextError> {
        let name = self.ident()?;
        self.names.iter().position(|n| *n == name).ok_or(TextError::UnknownList(name))
    }

    fn value(&mut self) -> Result<Value, TextError> {
        if self.is_ident("null") {
            self.bump();
            return Ok(Value::Null);
        }
        if self.is_ident("true") || self.is_ident("false") {
            return Ok(Value::Bool(self.ident()? == "true"));
        }
        Ok(Value::Int(self.int()? as i32))
    }

    fn cmp_op(&mut self) -> Result<CmpOp, TextError> {
        let op = match self.peek() {
            Tok::Punct(">") => CmpOp::Gt,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct("==") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            _ => return self.err("comparison"),
        };
        self.bump();
        Ok(op)
    }

    /// `v op c`, `c op v` or `v % k ==/!= r`.
    fn atom(&mut self, var: &str) -> Result<Atom, TextError> {
        if self.is_ident(var) {
            self.bump();
            if self.eat("%") {
                let k = self.int()? as i32;
                let eq = match self.cmp_op()? {
                    CmpOp::Eq => true,
                    CmpOp::Ne => false,
                    _ => return self.err("`==` or `!=`"),
                };
                let r = self.int()? as i32;
                return Ok(Atom::Mod { k, r, eq });
            }
            let op = self.cmp_op()?;
            return Ok(Atom::Cmp(op, self.int()? as i32));
        }
        let c = self.int()? as i32;
        let op = self.cmp_op()?;
        if !self.is_ident(var) {
            return self.err(&format!("`{var}`"));
        }
        self.bump();
        Ok(Atom::Cmp(op.flip(), c))
    }

    fn lambda_param(&mut self) -> Result<String, TextError> {
        let v = self.ident()?;
        self.expect("->")?;
        Ok(v)
    }

    fn pred(&mut self) -> Result<Pred, TextError> {
        let v = self.lambda_param()?;
        if self.is_ident("true") {
            self.bump();
            return Ok(Pred::True);
        }
        let a = self.atom(&v)?;
        if self.eat("&&") {
            let b = self.atom(&v)?;
            return Ok(Pred::Both(a, b));
        }
        Ok(Pred::One(a))
    }

    /// A linear expression `a * v + b` in any arrangement of terms.
    fn mapper(&mut self) -> Result<Mapper, TextError> {
        let v = self.lambda_param()?;
        let (mut a, mut b) = (0i64, 0i64);
        let mut sign = if self.eat("-") { -1 } else { 1 };
        loop {
            let (coef, has_var) = if self.is_ident(&v) {
                self.bump();
                if self.eat("*") {
                    (self.int()?, true)
                } else {
                    (1, true)
                }
            } else {
                let c = self.int()?;
                if self.eat("*") {
                    if !self.is_ident(&v) {
                        return self.err(&format!("`{v}`"));
                    }
                    self.bump();
                    (c, true)
                } else {
                    (c, false)
                }
            };
            if has_var {
                a += sign * coef;
            } else {
                b += sign * coef;
            }
            sign = if self.eat("+") {
                1
            } else if self.eat("-") {
                -1
            } else {
                break;
            };
        }
        Ok(Mapper { a: a as i32, b: b as i32 })
    }

    fn acc(&mut self) -> Result<AccOp, TextError> {
        if self.eat("(") {
            let x = self.ident()?;
            self.expect(",")?;
            let y = self.ident()?;
            self.expect(")")?;
            self.expect("->")?;
            let first = self.ident()?;
            let op = match self.peek() {
                Tok::Punct("+") => AccOp::Add,
                Tok::Punct("*") => AccOp::Mul,
                _ => return self.err("`+` or `*`"),
            };
            self.bump();
            let second = self.ident()?;
            if !(first == x && second == y || first == y && second == x) {
                return self.err("the lambda parameters");
            }
            return Ok(op);
        }
        let class = self.ident()?;
        if class != "Integer" && class != "Math" {
            return self.err("`Integer` or `Math`");
        }
        self.expect("::")?;
        match self.ident()?.as_str() {
            "sum" if class == "Integer" => Ok(AccOp::Add),
            "min" => Ok(AccOp::Min),
            "max" => Ok(AccOp::Max),
            _ => self.err("`sum`, `min` or `max`"),
        }
    }

    fn count(&mut self) -> Result<Count, TextError> {
        if let Tok::Ident(_) = self.peek() {
            let s = self.list()?;
            self.expect(".")?;
            self.keyword("size")?;
            self.expect("(")?;
            self.expect(")")?;
            return Ok(Count::SizeOf(s));
        }
        let n = self.int()?;
        u32::try_from(n).map(Count::Lit).or_else(|_| self.err("a non-negative count"))
    }

    /// `.orElse(d)`, optionally wrapped as `.get()` style is not accepted.
    fn or_else(&mut self) -> Result<Value, TextError> {
        self.expect(".")?;
        self.keyword("orElse")?;
        self.expect("(")?;
        let v = self.value()?;
        self.expect(")")?;
        Ok(v)
    }

    fn comparator(&mut self) -> Result<(), TextError> {
        self.expect("(")?;
        if !self.eat(")") {
            let class = self.ident()?;
            if class != "Integer" {
                return self.err("`Integer`");
            }
            self.expect("::")?;
            self.keyword("compare")?;
            self.expect(")")?;
        }
        Ok(())
    }

    fn line(&mut self) -> Result<ParsedLine, TextError> {
        // `out.add(c)`
        if matches!(self.peek_at(1), Tok::Punct(".")) && matches!(self.peek_at(2), Tok::Ident(s) if s == "add") {
            let target = self.ident()?;
            self.bump();
            self.bump();
            self.expect("(")?;
            let c = self.int()? as i32;
            self.expect(")")?;
            self.eat(";");
            return Ok(ParsedLine { target, term: OutputTerm::AddLast(c) });
        }
        let source = self.list()?;
        self.expect(".")?;
        self.keyword("stream")?;
        self.expect("(")?;
        self.expect(")")?;
        let mut stages = Vec::new();
        let mut terminal = None;
        let mut append_to = None;
        while self.eat(".") {
            let name = self.ident()?;
            self.expect("(")?;
            match name.as_str() {
                "filter" => stages.push(Stage::Filter(self.pred()?)),
                "map" => stages.push(Stage::Map(self.mapper()?)),
                "sorted" => stages.push(Stage::Sorted),
                "skip" => stages.push(Stage::Skip(self.count()?)),
                "limit" => stages.push(Stage::Limit(self.count()?)),
                "reduce" => {
                    let identity = self.int()? as i32;
                    self.expect(",")?;
                    terminal = Some(Terminal::Reduce { identity, op: self.acc()? });
                }
                "allMatch" => terminal = Some(Terminal::AllMatch(self.pred()?)),
                "anyMatch" => terminal = Some(Terminal::AnyMatch(self.pred()?)),
                "count" => terminal = Some(Terminal::Count),
                "max" | "min" | "findFirst" => {
                    self.i -= 1;
                    if name != "findFirst" {
                        self.comparator()?;
                    } else {
                        self.expect("(")?;
                        self.expect(")")?;
                    }
                    let default = self.or_else()?;
                    terminal = Some(match name.as_str() {
                        "max" => Terminal::Max { default },
                        "min" => Terminal::Min { default },
                        _ => Terminal::FindFirst { default },
                    });
                    break;
                }
                "forEachOrdered" => {
                    let t = self.ident()?;
                    self.expect("::")?;
                    self.keyword("add")?;
                    append_to = Some(t);
                }
                _ => return Err(TextError::Syntax {
                    line: self.toks[self.i].pos.line,
                    col: self.toks[self.i].pos.col,
                    expected: "a stream operation".into(),
                    found: format!("`{name}`"),
                }),
            }
            self.expect(")")?;
            if terminal.is_some() || append_to.is_some() {
                break;
            }
        }
        let pipeline = Pipeline { source, stages };
        let (target, term) = match (append_to, terminal) {
            (Some(t), None) => (t, OutputTerm::Append(pipeline)),
            (None, t) => {
                self.expect("=")?;
                self.expect(">")?;
                let target = self.ident()?;
                (target, t.map_or(OutputTerm::Replace(pipeline.clone()), |t| OutputTerm::Scalar(pipeline, t)))
            }
            (Some(_), Some(_)) => unreachable!("loop stops at the first terminal"),
        };
        self.eat(";");
        Ok(ParsedLine { target, term })
    }
}

/// Parses one line of pipeline text; list names resolve through `names`.
pub fn parse_term_line(line: &str, names: &[String]) -> Result<ParsedLine, TextError> {
    let toks = tokenize(line).map_err(|e| TextError::Lex(e.to_string()))?;
    let mut p = Parser { toks, i: 0, names };
    let parsed = p.line()?;
    if *p.peek() != Tok::Eof {
        return p.err("end of line");
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["list", "newList", "l", "p"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn round_trip() {
        let n = names();
        let lines = [
            "list.stream().filter(v -> v > 0).map(v -> 2 * v) => newList",
            "list.stream().filter(v -> v % 2 == 0 && v != -1).findFirst().orElse(null) => result",
            "l.stream().reduce(0, Integer::sum) => sum",
            "l.stream().skip(l.size()).forEachOrdered(p::add)",
            "p.stream().sorted().limit(3).max(Integer::compare).orElse(-1) => m",
            "list.stream().map(v -> -v + 3).allMatch(v -> true) => b",
            "p.stream().map(v -> 7).count() => c",
            "newList.add(5)",
        ];
        for line in lines {
            let parsed = parse_term_line(line, &n).unwrap();
            assert_eq!(parsed.term.to_line(&parsed.target, &n).unwrap(), line);
        }
    }

    #[test]
    fn loose_forms() {
        let n = names();
        let p = parse_term_line("list.stream().filter(el -> 0 < el).map(x -> x * 2 - 1) => newList;", &n).unwrap();
        let want = "list.stream().filter(v -> v > 0).map(v -> 2 * v - 1) => newList";
        assert_eq!(p.term.to_line(&p.target, &n).unwrap(), want);
        let p = parse_term_line("l.stream().reduce(0, (a, b) -> a + b) => s", &n).unwrap();
        assert_eq!(p.term, OutputTerm::Scalar(Pipeline { source: 2, stages: vec![] }, Terminal::Reduce { identity: 0, op: AccOp::Add }));
    }

    #[test]
    fn errors_carry_positions() {
        let n = names();
        match parse_term_line("list.stream().frob(v -> v) => x", &n) {
            Err(TextError::Syntax { col, .. }) => assert!(col > 1),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_term_line("q.stream() => x", &n), Err(TextError::UnknownList("q".into())));
    }
}
