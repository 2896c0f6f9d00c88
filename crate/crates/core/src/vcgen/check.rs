//! Exhaustive checking over the bounded universe.

use super::candidate::{outputs, Candidate, OutputVar};
use super::templates::{candidates, Context, Invariant, Scratch};
use super::{last_top_level_loop, make_vcs, VcError, VcKind};
use crate::frontend::ir::{IrProgram, LoopId};
use crate::heap::{exec, state_equiv, LoopEvent, NoObserver, Observer, ProgramState, Snapshot, Status, Universe, DEFAULT_FUEL};
use crate::par::{self, Budget, OutOfTime};
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub fuel: u64,
    pub budget: Budget,
}

impl Default for VerifyConfig {
    fn default() -> VerifyConfig {
        VerifyConfig { fuel: DEFAULT_FUEL, budget: Budget::unlimited() }
    }
}

/// Which condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub kind: VcKind,
    #[serde(rename = "loop")]
    pub loop_id: Option<LoopId>,
}

/// A pre-state that separates the candidate from the original code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Position in the universe's enumeration order.
    #[serde(skip)]
    pub index: u64,
    pub constructors: Vec<String>,
    #[serde(rename = "failedVC")]
    pub failed_vc: Failure,
    /// What the original code produces, or the candidate's view of the
    /// loop state for invariant failures that are state equations.
    pub expected: Option<Snapshot>,
    /// What the candidate produces, or the loop state that broke the
    /// invariant.
    pub actual: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Box<Counterexample>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VcVerdict {
    /// The invariant chosen for each loop, in loop order.
    Pass(Vec<Invariant>),
    Fail(Box<Counterexample>),
}

fn final_failure(ir: &IrProgram) -> Failure {
    Failure { kind: VcKind::Exit, loop_id: last_top_level_loop(ir) }
}

struct Buffers {
    pre: ProgramState,
    post: ProgramState,
    expected: ProgramState,
    buf: Vec<i32>,
}

impl Buffers {
    fn new(u: &Universe) -> Buffers {
        Buffers { pre: u.blank(), post: u.blank(), expected: u.blank(), buf: Vec::new() }
    }

    /// Runs the original and the candidate on state `idx`.
    fn run(&mut self, ir: &IrProgram, u: &Universe, c: &Candidate, outs: &[OutputVar], fuel: u64, idx: u64) {
        u.state_at(idx, &mut self.pre);
        self.post.clone_from(&self.pre);
        exec(ir, &mut self.post, fuel, &mut NoObserver);
        if self.post.status == Status::Normal {
            c.apply(outs, &self.pre, None, &mut self.expected, &mut self.buf);
        }
    }
}

fn status_text(s: Status) -> String {
    match s {
        Status::Normal => "normal termination".into(),
        Status::Exception(k) => k.to_string(),
        Status::OutOfFuel => "non-termination (fuel exhausted)".into(),
    }
}

/// Runs the original and `c` on every pre-state and compares the results.
/// The first state in enumeration order where they differ is returned; a
/// fault or fuel exhaustion in the original there makes the program not
/// refactorable.
pub fn check_end_to_end(ir: &IrProgram, u: &Universe, c: &Candidate, cfg: &VerifyConfig) -> Result<Verdict, VcError> {
    c.check_shape(ir)?;
    let outs = outputs(ir);
    let hit = par::first_failure(
        u.len(),
        cfg.budget,
        || Buffers::new(u),
        |b, idx| {
            b.run(ir, u, c, &outs, cfg.fuel, idx);
            (b.post.status != Status::Normal || !state_equiv(&b.post, &b.expected, &u.spec)).then_some(())
        },
    )
    .map_err(|OutOfTime| VcError::Timeout)?;
    let Some((idx, ())) = hit else {
        return Ok(Verdict::Pass);
    };
    let mut b = Buffers::new(u);
    b.run(ir, u, c, &outs, cfg.fuel, idx);
    let constructors = u.constructors(&b.pre);
    if b.post.status != Status::Normal {
        return Err(VcError::NotRefactorable {
            constructors,
            status: status_text(b.post.status),
            state: Box::new(Snapshot::of(u, &b.pre)),
        });
    }
    Ok(Verdict::Fail(Box::new(Counterexample {
        index: idx,
        constructors,
        failed_vc: final_failure(ir),
        expected: Some(Snapshot::of(u, &b.post)),
        actual: Snapshot::of(u, &b.expected),
    })))
}

/// Checks every condition from [`make_vcs`]. The final-state conditions
/// are checked first; then each loop's invariant templates are evaluated
/// at every entry, head and exit reached from every pre-state, and the
/// first template that survives is the loop's invariant.
pub fn check_vcs(ir: &IrProgram, u: &Universe, c: &Candidate, cfg: &VerifyConfig) -> Result<VcVerdict, VcError> {
    make_vcs(ir, c)?;
    if let Verdict::Fail(cex) = check_end_to_end(ir, u, c, cfg)? {
        return Ok(VcVerdict::Fail(cex));
    }
    check_invariants(ir, u, c, cfg)
}

/// The invariant part of [`check_vcs`], for a candidate that already
/// passed [`check_end_to_end`].
pub fn check_invariants(ir: &IrProgram, u: &Universe, c: &Candidate, cfg: &VerifyConfig) -> Result<VcVerdict, VcError> {
    make_vcs(ir, c)?;
    if ir.loops.is_empty() {
        return Ok(VcVerdict::Pass(Vec::new()));
    }
    let outs = outputs(ir);
    let templates: Vec<(LoopId, Invariant)> =
        ir.loops.iter().flat_map(|l| candidates(ir, l, &outs).into_iter().map(move |t| (l.id, t))).collect();
    let cx = Context { cand: c, outs: &outs, spec: &u.spec };

    type Kills = Vec<Option<(u64, VcKind)>>;
    let kills: Kills = par::fold(
        u.len(),
        cfg.budget,
        || (u.blank(), u.blank(), Scratch::new(&u.blank())),
        || vec![None; templates.len()],
        |(pre, post, scratch), kills: &mut Kills, idx| {
            u.state_at(idx, pre);
            post.clone_from(pre);
            let mut obs = Sweep { cx: &cx, templates: &templates, pre, scratch, kills, idx, stop_at: None };
            exec(ir, post, cfg.fuel, &mut obs);
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                if x.is_none() {
                    *x = y;
                }
            }
            a
        },
    )
    .map_err(|OutOfTime| VcError::Timeout)?;

    let mut chosen = Vec::new();
    for l in &ir.loops {
        let mine: Vec<usize> = (0..templates.len()).filter(|&t| templates[t].0 == l.id).collect();
        match mine.iter().find(|&&t| kills[t].is_none()) {
            Some(&t) => chosen.push(templates[t].1),
            None => {
                // Report the failure of the preferred template.
                let Some(&t) = mine.first() else {
                    return Ok(VcVerdict::Fail(Box::new(no_template(ir, u, l.id))));
                };
                let (idx, kind) = kills[t].expect("every template was killed");
                return Ok(VcVerdict::Fail(Box::new(replay_kill(ir, u, &cx, &templates, t, idx, kind, cfg.fuel))));
            }
        }
    }
    Ok(VcVerdict::Pass(chosen))
}

struct Sweep<'a, 'b> {
    cx: &'a Context<'a>,
    templates: &'a [(LoopId, Invariant)],
    pre: &'b ProgramState,
    scratch: &'b mut Scratch,
    kills: &'b mut Vec<Option<(u64, VcKind)>>,
    idx: u64,
    /// When set, stop at the first event where this template fails.
    stop_at: Option<usize>,
}

fn kind_of(e: LoopEvent) -> VcKind {
    match e {
        LoopEvent::Entry => VcKind::Base,
        LoopEvent::Head => VcKind::Inductive,
        LoopEvent::Exit => VcKind::Exit,
    }
}

impl Observer for Sweep<'_, '_> {
    fn on_loop(&mut self, event: LoopEvent, id: LoopId, state: &ProgramState) -> bool {
        for (t, (lid, inv)) in self.templates.iter().enumerate() {
            if *lid != id || self.kills[t].is_some() || self.stop_at.is_some_and(|s| s != t) {
                continue;
            }
            if !inv.holds(self.cx, self.pre, state, self.scratch) {
                self.kills[t] = Some((self.idx, kind_of(event)));
                if self.stop_at.is_some() {
                    // Keep the offending state for the report.
                    self.scratch.expected = state.clone();
                    return false;
                }
            }
        }
        true
    }
}

#[allow(clippy::too_many_arguments)]
fn replay_kill(
    ir: &IrProgram,
    u: &Universe,
    cx: &Context<'_>,
    templates: &[(LoopId, Invariant)],
    t: usize,
    idx: u64,
    kind: VcKind,
    fuel: u64,
) -> Counterexample {
    let pre = u.state(idx);
    let mut post = pre.clone();
    let mut scratch = Scratch::new(&u.blank());
    let mut kills = vec![None; templates.len()];
    let mut obs = Sweep { cx, templates, pre: &pre, scratch: &mut scratch, kills: &mut kills, idx, stop_at: Some(t) };
    exec(ir, &mut post, fuel, &mut obs);
    let at = scratch.expected;
    let expected = match templates[t].1 {
        Invariant::PrefixImage { .. } => {
            let mut e = u.blank();
            cx.cand.apply(cx.outs, &pre, None, &mut e, &mut Vec::new());
            Some(Snapshot::of(u, &e))
        }
        _ => None,
    };
    Counterexample {
        index: idx,
        constructors: u.constructors(&pre),
        failed_vc: Failure { kind, loop_id: Some(templates[t].0) },
        expected,
        actual: Snapshot::of(u, &at),
    }
}

fn no_template(ir: &IrProgram, u: &Universe, id: LoopId) -> Counterexample {
    let pre = u.state(0);
    let _ = ir;
    Counterexample {
        index: 0,
        constructors: u.constructors(&pre),
        failed_vc: Failure { kind: VcKind::Base, loop_id: Some(id) },
        expected: None,
        actual: Snapshot::of(u, &pre),
    }
}
