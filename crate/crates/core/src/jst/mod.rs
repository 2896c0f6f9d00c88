//! Stream terms: lambdas, stages, terminals and per-output terms, their
//! evaluation over value sequences and over heaps, and their text form.

mod eval;
pub mod grammar;
pub mod ops;
mod text;

pub use eval::Cut;
pub use text::{parse_term_line, pipeline_text, terminal_text, ParsedLine, TextError};

use crate::frontend::ir::Value;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne];

    pub fn holds(self, a: i32, b: i32) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    /// The operator with its operands swapped: `c < v` is `v > c`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }
}

/// One predicate atom over the bound variable `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `v op c`.
    Cmp(CmpOp, i32),
    /// `v % k == r` or, when `eq` is false, `v % k != r`.
    Mod { k: i32, r: i32, eq: bool },
}

impl Atom {
    pub fn holds(self, v: i32) -> bool {
        match self {
            Atom::Cmp(op, c) => op.holds(v, c),
            Atom::Mod { k, r, eq } => (v.wrapping_rem(k) == r) == eq,
        }
    }
}

/// `λv. P(v)`: a conjunction of at most two atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    True,
    One(Atom),
    Both(Atom, Atom),
}

impl Pred {
    #[inline]
    pub fn holds(self, v: i32) -> bool {
        match self {
            Pred::True => true,
            Pred::One(a) => a.holds(v),
            Pred::Both(a, b) => a.holds(v) && b.holds(v),
        }
    }
}

/// `λv. a·v + b` with wrapping arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapper {
    pub a: i32,
    pub b: i32,
}

impl Mapper {
    #[inline]
    pub fn apply(self, v: i32) -> i32 {
        self.a.wrapping_mul(v).wrapping_add(self.b)
    }

    pub fn is_identity(self) -> bool {
        self.a == 1 && self.b == 0
    }
}

/// `λa b. f(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccOp {
    Add,
    Mul,
    Min,
    Max,
}

impl AccOp {
    pub const ALL: [AccOp; 4] = [AccOp::Add, AccOp::Mul, AccOp::Min, AccOp::Max];

    #[inline]
    pub fn apply(self, a: i32, b: i32) -> i32 {
        match self {
            AccOp::Add => a.wrapping_add(b),
            AccOp::Mul => a.wrapping_mul(b),
            AccOp::Min => a.min(b),
            AccOp::Max => a.max(b),
        }
    }
}

/// Argument of `skip` and `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Count {
    Lit(u32),
    /// Size of a list parameter in the pre-state, by reference slot.
    SizeOf(usize),
}

/// An intermediate stream operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Filter(Pred),
    Map(Mapper),
    Sorted,
    Skip(Count),
    Limit(Count),
}

/// A reducing stream operation producing a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    Reduce { identity: i32, op: AccOp },
    /// `max(Integer::compare).orElse(default)`.
    Max { default: Value },
    Min { default: Value },
    /// `findFirst().orElse(default)`.
    FindFirst { default: Value },
    AllMatch(Pred),
    AnyMatch(Pred),
    /// `(int) count()`.
    Count,
}

/// `source.stream()` followed by stages.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pipeline {
    /// Reference slot of the source list.
    pub source: usize,
    pub stages: Vec<Stage>,
}

/// How one output variable is computed from the pre-state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutputTerm {
    /// Keeps its pre-state value, or its constant initializer when the
    /// output is declared by the method.
    Unchanged,
    /// The list's contents become the pipeline's elements.
    Replace(Pipeline),
    /// The pipeline's elements are appended to the list.
    Append(Pipeline),
    /// One constant is appended to the list.
    AddLast(i32),
    Scalar(Pipeline, Terminal),
}

impl OutputTerm {
    /// Stages plus terminals; collection plumbing is not counted.
    pub fn len(&self) -> usize {
        match self {
            OutputTerm::Unchanged => 0,
            OutputTerm::Replace(p) | OutputTerm::Append(p) => p.stages.len(),
            OutputTerm::AddLast(_) => 1,
            OutputTerm::Scalar(p, _) => p.stages.len() + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pipeline(&self) -> Option<&Pipeline> {
        match self {
            OutputTerm::Replace(p) | OutputTerm::Append(p) | OutputTerm::Scalar(p, _) => Some(p),
            _ => None,
        }
    }

    /// Whether the term reads list `slot` as a source or through a size.
    pub fn mentions(&self, slot: usize) -> bool {
        self.pipeline().is_some_and(|p| {
            p.source == slot
                || p.stages.iter().any(|s| {
                    matches!(s, Stage::Skip(Count::SizeOf(x)) | Stage::Limit(Count::SizeOf(x)) if *x == slot)
                })
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Cmp(op, c) => write!(f, "v {} {c}", op.symbol()),
            Atom::Mod { k, r, eq } => write!(f, "v % {k} {} {r}", if *eq { "==" } else { "!=" }),
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::True => f.write_str("v -> true"),
            Pred::One(a) => write!(f, "v -> {a}"),
            Pred::Both(a, b) => write!(f, "v -> {a} && {b}"),
        }
    }
}

impl fmt::Display for Mapper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Mapper { a, b } = *self;
        let lin = match a {
            0 => return write!(f, "v -> {b}"),
            1 => "v".to_string(),
            -1 => "-v".to_string(),
            _ => format!("{a} * v"),
        };
        match b {
            0 => write!(f, "v -> {lin}"),
            b if b < 0 => write!(f, "v -> {lin} - {}", (b as i64).abs()),
            b => write!(f, "v -> {lin} + {b}"),
        }
    }
}

impl fmt::Display for AccOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccOp::Add => "Integer::sum",
            AccOp::Mul => "(a, b) -> a * b",
            AccOp::Min => "Integer::min",
            AccOp::Max => "Integer::max",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JstError {
    #[error("segment end is not reachable from its start")]
    IllFormedSegment,
    #[error("unbound name in slot {0}")]
    MissingBinding(usize),
    #[error("index {0} out of range")]
    IndexOutOfRange(i64),
    #[error("operand has the wrong kind")]
    WrongKind,
}
