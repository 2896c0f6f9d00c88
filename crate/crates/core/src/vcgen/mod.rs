//! Verification conditions for a candidate refactoring and their checking
//! over the bounded universe.
//!
//! Each loop gets three conditions: the invariant holds on entry, it is
//! preserved by one more iteration, and on exit it (or, for the last
//! top-level loop, the final state) matches the candidate. A loop-free
//! program gets a single exit condition.

mod candidate;
mod check;
mod templates;

pub use candidate::{list_names, outputs, Candidate, CandidateError, OutputVar};
pub use check::{check_end_to_end, check_invariants, check_vcs, Counterexample, Failure, VcVerdict, Verdict, VerifyConfig};
pub use templates::{Invariant, Position};

use crate::frontend::ir::{IrProgram, LoopId};
use crate::heap::Snapshot;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VcKind {
    Base,
    Inductive,
    Exit,
}

/// One condition; `loop_id` is `None` for the loop-free condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vc {
    pub kind: VcKind,
    #[serde(rename = "loop")]
    pub loop_id: Option<LoopId>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("candidate does not fit the program: {0}")]
    ShapeMismatch(String),
    #[error("original code raises {status} on {}", constructors.join("; "))]
    NotRefactorable { constructors: Vec<String>, status: String, state: Box<Snapshot> },
    #[error("time budget exhausted")]
    Timeout,
}

/// The last loop that is not nested in another; its exit is where the
/// final state is compared.
pub fn last_top_level_loop(ir: &IrProgram) -> Option<LoopId> {
    ir.loops.iter().filter(|l| l.parent.is_none()).map(|l| l.id).max()
}

/// Conditions for `c` on `ir`, three per loop in loop order.
pub fn make_vcs(ir: &IrProgram, c: &Candidate) -> Result<Vec<Vc>, VcError> {
    c.check_shape(ir)?;
    let last = last_top_level_loop(ir);
    if ir.loops.is_empty() {
        return Ok(vec![Vc { kind: VcKind::Exit, loop_id: None, text: "run(h_i) ~ S_f(h_i)".into() }]);
    }
    let mut vcs = Vec::new();
    for l in &ir.loops {
        let inv = &l.invariant;
        let exit = if Some(l.id) == last {
            format!("{inv} && !G => run(h_i) ~ S_f(h_i)")
        } else {
            format!("{inv} && !G => {inv}")
        };
        let outer = l.parent.map_or(String::new(), |p| format!("{} && ", ir.loops[p].invariant));
        vcs.push(Vc { kind: VcKind::Base, loop_id: Some(l.id), text: format!("{outer}init => {inv}") });
        vcs.push(Vc { kind: VcKind::Inductive, loop_id: Some(l.id), text: format!("{inv} && G && T => {inv}'") });
        vcs.push(Vc { kind: VcKind::Exit, loop_id: Some(l.id), text: exit });
    }
    Ok(vcs)
}
