//! The finite term grammar searched by synthesis.
//!
//! Every list is ordered simplest first: small constants before large
//! ones, equality tests before orderings, single atoms before
//! conjunctions.

use super::{AccOp, Atom, CmpOp, Count, Mapper, Pred, Stage, Terminal};
use crate::frontend::ast::Type;
use crate::frontend::ir::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    /// Constants, in preference order.
    pub pool: Vec<i32>,
    pub preds: Vec<Pred>,
    pub mappers: Vec<Mapper>,
    pub counts: Vec<Count>,
    pub stages: Vec<Stage>,
}

/// Comparison operators in grammar order.
const CMP_ORDER: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le];

impl Grammar {
    /// `pool` supplies every constant; `size_slots` are the list
    /// parameters whose pre-state size may serve as a count.
    pub fn new(pool: &[i32], size_slots: &[usize]) -> Grammar {
        let mut atoms = Vec::new();
        for &c in pool {
            for op in CMP_ORDER {
                atoms.push(Atom::Cmp(op, c));
            }
        }
        for &k in pool.iter().filter(|&&k| k >= 2) {
            for r in by_magnitude(k - 1) {
                for eq in [true, false] {
                    atoms.push(Atom::Mod { k, r, eq });
                }
            }
        }
        let mut preds = vec![Pred::True];
        preds.extend(atoms.iter().map(|&a| Pred::One(a)));
        for (i, &a) in atoms.iter().enumerate() {
            for &b in &atoms[i + 1..] {
                preds.push(Pred::Both(a, b));
            }
        }

        let mut mappers = Vec::new();
        for &b in pool {
            for &a in pool.iter().filter(|&&a| a != 0) {
                let m = Mapper { a, b };
                if !m.is_identity() {
                    mappers.push(m);
                }
            }
        }
        for &b in pool {
            mappers.push(Mapper { a: 0, b });
        }

        let mut counts: Vec<Count> = pool.iter().filter(|&&k| k >= 1).map(|&k| Count::Lit(k as u32)).collect();
        counts.extend(size_slots.iter().map(|&s| Count::SizeOf(s)));

        // `filter(v -> true)` is a no-op and never worth a stage.
        let mut stages: Vec<Stage> = preds[1..].iter().map(|&p| Stage::Filter(p)).collect();
        stages.extend(mappers.iter().map(|&m| Stage::Map(m)));
        stages.push(Stage::Sorted);
        stages.extend(counts.iter().map(|&c| Stage::Skip(c)));
        stages.extend(counts.iter().map(|&c| Stage::Limit(c)));

        Grammar { pool: pool.to_vec(), preds, mappers, counts, stages }
    }

    /// Terminals that can produce a value of type `ty`.
    pub fn terminals(&self, ty: Type) -> Vec<Terminal> {
        let mut defaults: Vec<Value> = Vec::new();
        if ty == Type::Integer {
            defaults.push(Value::Null);
        }
        defaults.extend(self.pool.iter().map(|&c| Value::Int(c)));
        let mut out = Vec::new();
        match ty {
            Type::Boolean => {
                out.extend(self.preds[1..].iter().map(|&p| Terminal::AllMatch(p)));
                out.extend(self.preds[1..].iter().map(|&p| Terminal::AnyMatch(p)));
            }
            Type::Int | Type::Integer => {
                for op in AccOp::ALL {
                    for &identity in &self.pool {
                        out.push(Terminal::Reduce { identity, op });
                    }
                }
                out.push(Terminal::Count);
                for &d in &defaults {
                    out.push(Terminal::FindFirst { default: d });
                }
                for &d in &defaults {
                    out.push(Terminal::Max { default: d });
                }
                for &d in &defaults {
                    out.push(Terminal::Min { default: d });
                }
            }
            Type::List | Type::Iterator => {}
        }
        out
    }
}

/// `0, 1, -1, ..., m, -m`.
fn by_magnitude(m: i32) -> Vec<i32> {
    let mut v = vec![0];
    for i in 1..=m {
        v.push(i);
        v.push(-i);
    }
    v
}
