//! Counterexample-guided synthesis of a pipeline candidate.
//!
//! Starting from the candidate that changes nothing, each round verifies
//! the current candidate over the bounded universe. A failure adds the
//! separating pre-state to the counterexample set, and the next candidate
//! is the first one of the smallest length that matches the original code
//! on every counterexample. Lengths only grow, so the accepted candidate is
//! of minimal length.

mod cex;
mod enumerative;
mod genetic;
mod race;

pub use cex::{term_obs, CexEntry, CexSet, Obs};
pub use enumerative::Enumerator;
pub use genetic::{decode, replacement_count, GaConfig, Gene, Genome, Part};
pub use race::{Lockstep, RaceResult, Scheduler, Strategy, Threads, Worker};

use crate::frontend::ir::{HeapOp, Initial, IrExpr, IrProgram, IrStmt, Value};
use crate::heap::{by_magnitude, run, Bounds, Universe, DEFAULT_FUEL};
use crate::jst::grammar::Grammar;
use crate::jst::{OutputTerm, Terminal};
use crate::par::Budget;
use crate::vcgen::{
    check_end_to_end, check_invariants, list_names, outputs, Candidate, Counterexample, Failure, Invariant, OutputVar, VcError, VcVerdict,
    Verdict, VerifyConfig,
};
use serde::Serialize;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

/// How a candidate is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Final states must match; invariants are checked afterwards and
    /// reported.
    #[default]
    Equivalence,
    /// Every loop also needs an invariant that passes its conditions.
    Invariants,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub bounds: Bounds,
    /// Longest term per output, in stages plus terminal.
    pub max_pipeline_len: usize,
    /// Constants of the lambda grammar; by default the value set followed
    /// by the program's own integer literals.
    pub constant_pool: Option<Vec<i32>>,
    pub ga_population: usize,
    pub ga_replacement_rate: f64,
    pub ga_mutation_rate: f64,
    pub ga_generations: usize,
    pub use_ga: bool,
    pub use_enumerative: bool,
    pub timeout: Duration,
    pub seed: u64,
    pub mode: Mode,
    /// In equivalence mode, look for invariants after acceptance.
    pub post_check: bool,
    pub fuel: u64,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            bounds: Bounds::default(),
            max_pipeline_len: 3,
            constant_pool: None,
            ga_population: 2000,
            ga_replacement_rate: 0.15,
            ga_mutation_rate: 0.01,
            ga_generations: 200,
            use_ga: true,
            use_enumerative: true,
            timeout: Duration::from_secs(300),
            seed: 0,
            mode: Mode::Equivalence,
            post_check: true,
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0} must lie in [0, 1]")]
    Rate(&'static str),
    #[error("population must be at least 2")]
    Population,
    #[error("at least one search strategy must be enabled")]
    NoStrategy,
    #[error("value set must not be empty")]
    NoValues,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.ga_replacement_rate) {
            return Err(ConfigError::Rate("replacement rate"));
        }
        if !(0.0..=1.0).contains(&self.ga_mutation_rate) {
            return Err(ConfigError::Rate("mutation rate"));
        }
        if self.ga_population < 2 {
            return Err(ConfigError::Population);
        }
        if !self.use_ga && !self.use_enumerative {
            return Err(ConfigError::NoStrategy);
        }
        if self.bounds.values.is_empty() {
            return Err(ConfigError::NoValues);
        }
        Ok(())
    }
}

/// Why no refactoring was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "reason")]
pub enum NoRefactoring {
    #[error("time budget exhausted")]
    Timeout,
    #[error("the original code raises {status} on {}", constructors.join("; "))]
    NotRefactorable { status: String, constructors: Vec<String> },
    #[error("no candidate of at most {max_len} operations per output matches the counterexamples")]
    InstructionSetExhausted { max_len: usize },
    #[error("the loop changes no output")]
    NoEffect,
    #[error("output values match but the heap shape differs on {}", constructors.join("; "))]
    Unrepresentable { constructors: Vec<String> },
    #[error("no loop invariant found for the candidate")]
    InvariantNotFound { failed: Failure, constructors: Vec<String> },
}

/// Outcome of the invariant check on an accepted candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantCheck {
    Skipped,
    Found(Vec<Invariant>),
    Failed(Box<Counterexample>),
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refactoring {
    pub candidate: Candidate,
    pub invariants: InvariantCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Verify,
    Synthesise,
}

/// One line of the progress log, written when an iteration ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogLine {
    pub iteration: usize,
    /// `Synthesise` when verification returned a counterexample and the
    /// search continues, `Verify` when the run ended at verification.
    pub phase: Phase,
    pub candidate: String,
    /// The new counterexample, if any.
    pub constructors: Vec<String>,
    pub elapsed_ms: u64,
    /// Which search produced the candidate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
}

impl std::fmt::Display for LogLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let phase = match self.phase {
            Phase::Verify => "verify",
            Phase::Synthesise => "synthesise",
        };
        write!(f, "[{}] {phase} {}ms: {}", self.iteration, self.elapsed_ms, self.candidate.replace('\n', " | "))?;
        if let Some(s) = self.strategy {
            write!(f, " ({})", if s == Strategy::Enumerative { "enumerative" } else { "genetic" })?;
        }
        if !self.constructors.is_empty() {
            write!(f, " <- {}", self.constructors.join("; "))?;
        }
        Ok(())
    }
}

/// Everything a synthesis run produced.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub result: Result<Refactoring, NoRefactoring>,
    pub log: Vec<LogLine>,
    /// Candidates refuted by verification, in order.
    pub rejected: Vec<Candidate>,
    pub cex: CexSet,
    pub universe: Universe,
    pub outs: Vec<OutputVar>,
    pub names: Vec<String>,
    pub iterations: usize,
}

/// The search space for one program.
#[derive(Debug, Clone)]
pub struct Problem {
    pub outs: Vec<OutputVar>,
    pub grammar: Grammar,
    /// Reference slots of the list parameters.
    pub sources: Vec<usize>,
    /// Per output: terminals of its type.
    pub terminals: Vec<Vec<Terminal>>,
    pub max_len: usize,
}

impl Problem {
    pub fn new(ir: &IrProgram, cfg: &SearchConfig) -> Problem {
        let outs = outputs(ir);
        let sources: Vec<usize> = ir.list_params().map(|v| ir.var(v).slot).collect();
        let pool = cfg.constant_pool.clone().unwrap_or_else(|| default_pool(ir, &cfg.bounds));
        let grammar = Grammar::new(&pool, &sources);
        let terminals = outs.iter().map(|o| if o.is_list() { Vec::new() } else { grammar.terminals(o.ty) }).collect();
        Problem { outs, grammar, sources, terminals, max_len: cfg.max_pipeline_len }
    }
}

/// Result of one search at one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Search {
    Found(Candidate),
    /// Nothing of this length matches.
    Exhausted,
    /// The search ran out of generations.
    NoProgress,
    Stopped,
}

/// The value set in enumeration order, then the program's other integer
/// literals by magnitude.
pub fn default_pool(ir: &IrProgram, bounds: &Bounds) -> Vec<i32> {
    let mut pool = bounds.values.clone();
    let mut lits = Vec::new();
    for s in &ir.body {
        stmt_literals(s, &mut lits);
    }
    for v in &ir.vars {
        if let Some(Initial::Scalar(Value::Int(c))) = v.initial {
            lits.push(c);
        }
    }
    let (lo, hi) = (lits.iter().copied().min().unwrap_or(0), lits.iter().copied().max().unwrap_or(0));
    for c in by_magnitude(lo, hi) {
        if lits.contains(&c) && !pool.contains(&c) {
            pool.push(c);
        }
    }
    pool
}

fn stmt_literals(s: &IrStmt, out: &mut Vec<i32>) {
    let expr = |e: &IrExpr, out: &mut Vec<i32>| {
        e.walk(&mut |x| {
            if let IrExpr::Const(Value::Int(c)) = x {
                out.push(*c);
            }
        })
    };
    match s {
        IrStmt::Assign { value, .. } => expr(value, out),
        IrStmt::Heap { op, .. } => match op {
            HeapOp::AddLast { value, .. } => expr(value, out),
            HeapOp::AddAt { index, value, .. } | HeapOp::Set { index, value, .. } => {
                expr(index, out);
                expr(value, out);
            }
            HeapOp::RemoveAt { index, .. } => expr(index, out),
            _ => {}
        },
        IrStmt::If { cond, then, els } => {
            expr(cond, out);
            for s in then.iter().chain(els) {
                stmt_literals(s, out);
            }
        }
        IrStmt::Loop { guard, body, update, .. } => {
            expr(guard, out);
            for s in body.iter().chain(update) {
                stmt_literals(s, out);
            }
        }
        IrStmt::Break | IrStmt::Continue | IrStmt::Return => {}
    }
}

/// Runs synthesis with both searches on their own threads.
pub fn synthesize(ir: &IrProgram, cfg: &SearchConfig) -> Synthesis {
    synthesize_with(ir, cfg, &Threads)
}

pub fn synthesize_with(ir: &IrProgram, cfg: &SearchConfig, scheduler: &dyn Scheduler) -> Synthesis {
    let start = Instant::now();
    let deadline = start.checked_add(cfg.timeout);
    let universe = Universe::new(ir, &cfg.bounds);
    let problem = Problem::new(ir, cfg);
    let mut s = Synthesis {
        result: Err(NoRefactoring::Timeout),
        log: Vec::new(),
        rejected: Vec::new(),
        cex: CexSet::new(),
        universe,
        outs: problem.outs.clone(),
        names: list_names(ir),
        iterations: 0,
    };
    s.result = refine(ir, cfg, scheduler, &problem, &mut s, start, deadline);
    s
}

fn refine(
    ir: &IrProgram,
    cfg: &SearchConfig,
    scheduler: &dyn Scheduler,
    p: &Problem,
    s: &mut Synthesis,
    start: Instant,
    deadline: Option<Instant>,
) -> Result<Refactoring, NoRefactoring> {
    let u = &s.universe;
    let vcfg = VerifyConfig { fuel: cfg.fuel, budget: Budget { deadline } };
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let elapsed = || start.elapsed().as_millis() as u64;
    let use_ga = cfg.use_ga && !p.sources.is_empty();
    let mut cand = Candidate::identity(p.outs.len());
    let mut strategy = None;
    let mut l = 0;
    loop {
        s.iterations += 1;
        if expired() {
            return Err(NoRefactoring::Timeout);
        }
        let text = cand.to_text(&s.outs, &s.names);
        let verdict = check_end_to_end(ir, u, &cand, &vcfg).map_err(|e| match e {
            VcError::NotRefactorable { constructors, status, .. } => NoRefactoring::NotRefactorable { status, constructors },
            VcError::Timeout => NoRefactoring::Timeout,
            VcError::ShapeMismatch(m) => unreachable!("synthesized candidate does not fit: {m}"),
        })?;
        let cex = match verdict {
            Verdict::Pass => {
                s.log.push(LogLine {
                    iteration: s.iterations,
                    phase: Phase::Verify,
                    candidate: text,
                    constructors: Vec::new(),
                    elapsed_ms: elapsed(),
                    strategy,
                });
                if cand.terms.iter().all(|t| *t == OutputTerm::Unchanged) {
                    return Err(NoRefactoring::NoEffect);
                }
                let invariants = match (cfg.mode, cfg.post_check) {
                    (Mode::Equivalence, false) => InvariantCheck::Skipped,
                    _ => match check_invariants(ir, u, &cand, &vcfg) {
                        Ok(VcVerdict::Pass(v)) => InvariantCheck::Found(v),
                        Ok(VcVerdict::Fail(c)) => InvariantCheck::Failed(c),
                        Err(_) => InvariantCheck::TimedOut,
                    },
                };
                if cfg.mode == Mode::Invariants {
                    match invariants {
                        InvariantCheck::Failed(c) => {
                            return Err(NoRefactoring::InvariantNotFound { failed: c.failed_vc, constructors: c.constructors })
                        }
                        InvariantCheck::TimedOut => return Err(NoRefactoring::Timeout),
                        _ => {}
                    }
                }
                return Ok(Refactoring { candidate: cand, invariants });
            }
            Verdict::Fail(c) => c,
        };
        let pre = u.state(cex.index);
        let post = run(ir, &pre, cfg.fuel);
        s.cex.insert(u, &s.outs, pre, post);
        s.log.push(LogLine {
            iteration: s.iterations,
            phase: Phase::Synthesise,
            candidate: text,
            constructors: cex.constructors.clone(),
            elapsed_ms: elapsed(),
            strategy,
        });
        if s.cex.consistent(&cand, &s.outs) {
            return Err(NoRefactoring::Unrepresentable { constructors: cex.constructors });
        }
        s.rejected.push(cand);

        let cexs = &s.cex;
        let stop = |cancel: &AtomicBool| cancel.load(Ordering::Relaxed) || expired();
        let found = loop {
            if l > p.max_len * p.outs.len() {
                return Err(NoRefactoring::InstructionSetExhausted { max_len: p.max_len });
            }
            let enumerative = |cancel: &AtomicBool| {
                if !cfg.use_enumerative {
                    return Search::NoProgress;
                }
                Enumerator::new(p, cexs).search(l, &|| stop(cancel))
            };
            let ga_cfg = GaConfig {
                population: cfg.ga_population,
                replacement_rate: cfg.ga_replacement_rate,
                mutation_rate: cfg.ga_mutation_rate,
                generations: cfg.ga_generations,
                seed: cfg.seed ^ (s.iterations as u64) << 32,
            };
            let genetic = |cancel: &AtomicBool| genetic::search(p, cexs, l, &ga_cfg, &|| stop(cancel));
            let ga: Option<Worker<'_>> = if use_ga && l > 0 { Some(&genetic) } else { None };
            match scheduler.race(&enumerative, ga) {
                RaceResult::Found(st, c) => break (st, c),
                RaceResult::Exhausted => l += 1,
                RaceResult::Stopped => return Err(NoRefactoring::Timeout),
            }
        };
        let (st, next) = found;
        assert!(s.cex.consistent(&next, &s.outs), "search returned a candidate that misses a counterexample");
        strategy = Some(st);
        cand = next;
    }
}
