//! Exhaustive search at an exact length.
//!
//! Pipelines are built level by level, one stage per level. Two pipelines
//! of the same level that yield the same stream on every counterexample
//! are interchangeable, so only the first is kept and extended.

use super::cex::{CexSet, Obs};
use super::{Problem, Search};
use crate::jst::{OutputTerm, Pipeline};
use crate::vcgen::Candidate;
use std::collections::{HashMap, HashSet};

struct Rep {
    pipe: Pipeline,
    /// Stream per counterexample.
    streams: Vec<Vec<i32>>,
}

/// Search state for one counterexample set; levels and per-output
/// matches are reused across lengths.
pub struct Enumerator<'a> {
    p: &'a Problem,
    cex: &'a CexSet,
    levels: Vec<Vec<Rep>>,
    found: HashMap<(usize, usize), Option<OutputTerm>>,
    ticks: u32,
}

/// Signals that the caller asked to stop.
struct Stop;

impl<'a> Enumerator<'a> {
    pub fn new(p: &'a Problem, cex: &'a CexSet) -> Enumerator<'a> {
        Enumerator { p, cex, levels: Vec::new(), found: HashMap::new(), ticks: 0 }
    }

    /// First candidate of total length `l`, trying length splits across
    /// outputs in lexicographic order.
    pub fn search(&mut self, l: usize, stop: &dyn Fn() -> bool) -> Search {
        let n = self.p.outs.len();
        let mut split = vec![0; n];
        match self.splits(l, 0, &mut split, stop) {
            Ok(Some(c)) => Search::Found(c),
            Ok(None) => Search::Exhausted,
            Err(Stop) => Search::Stopped,
        }
    }

    fn splits(&mut self, left: usize, k: usize, split: &mut Vec<usize>, stop: &dyn Fn() -> bool) -> Result<Option<Candidate>, Stop> {
        let n = split.len();
        if k + 1 == n {
            if left > self.p.max_len {
                return Ok(None);
            }
            split[k] = left;
            let mut terms = Vec::with_capacity(n);
            for (o, &len) in split.iter().enumerate() {
                match self.first_match(o, len, stop)? {
                    Some(t) => terms.push(t),
                    None => return Ok(None),
                }
            }
            return Ok(Some(Candidate { terms }));
        }
        for len in 0..=left.min(self.p.max_len) {
            split[k] = len;
            // Fail fast on an output with nothing at this length.
            if self.first_match(k, len, stop)?.is_none() {
                continue;
            }
            if let Some(c) = self.splits(left - len, k + 1, split, stop)? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    fn tick(&mut self, stop: &dyn Fn() -> bool) -> Result<(), Stop> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 512 == 0 && stop() {
            return Err(Stop);
        }
        Ok(())
    }

    fn level(&mut self, k: usize, stop: &dyn Fn() -> bool) -> Result<&[Rep], Stop> {
        while self.levels.len() <= k {
            let next = if self.levels.is_empty() { self.sources() } else { self.extend(stop)? };
            self.levels.push(next);
        }
        Ok(&self.levels[k])
    }

    fn sources(&self) -> Vec<Rep> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &s in &self.p.sources {
            let pipe = Pipeline { source: s, stages: Vec::new() };
            let streams: Vec<Vec<i32>> = self.cex.entries().iter().map(|e| pipe.eval(&e.pre.heap)).collect();
            if seen.insert(streams.clone()) {
                out.push(Rep { pipe, streams });
            }
        }
        out
    }

    fn extend(&mut self, stop: &dyn Fn() -> bool) -> Result<Vec<Rep>, Stop> {
        let prev = std::mem::take(self.levels.last_mut().expect("level 0 exists"));
        let mut seen: HashSet<Vec<Vec<i32>>> = HashSet::new();
        let mut out = Vec::new();
        let entries = self.cex.entries();
        let p = self.p;
        let mut result = Ok(());
        'outer: for r in &prev {
            for &stage in &p.grammar.stages {
                if let Err(s) = self.tick(stop) {
                    result = Err(s);
                    break 'outer;
                }
                let streams: Vec<Vec<i32>> = r
                    .streams
                    .iter()
                    .zip(entries)
                    .map(|(s, e)| {
                        let mut b = s.clone();
                        stage.apply(&mut b, &e.pre.heap, None);
                        b
                    })
                    .collect();
                if seen.contains(&streams) {
                    continue;
                }
                seen.insert(streams.clone());
                let mut pipe = r.pipe.clone();
                pipe.stages.push(stage);
                out.push(Rep { pipe, streams });
            }
        }
        *self.levels.last_mut().expect("level exists") = prev;
        result.map(|()| out)
    }

    /// First term of exactly `len` for output `o` that matches every
    /// counterexample.
    fn first_match(&mut self, o: usize, len: usize, stop: &dyn Fn() -> bool) -> Result<Option<OutputTerm>, Stop> {
        if let Some(t) = self.found.get(&(o, len)) {
            return Ok(t.clone());
        }
        let t = self.scan(o, len, stop)?;
        self.found.insert((o, len), t.clone());
        Ok(t)
    }

    fn scan(&mut self, o: usize, len: usize, stop: &dyn Fn() -> bool) -> Result<Option<OutputTerm>, Stop> {
        let cex = self.cex;
        let entries = cex.entries();
        if len == 0 && entries.iter().all(|e| e.base[o] == e.target[o]) {
            return Ok(Some(OutputTerm::Unchanged));
        }
        if len > self.p.max_len {
            return Ok(None);
        }
        let p = self.p;
        if p.outs[o].is_list() {
            // Level 0 may already have been consumed by `extend`.
            let sources;
            let reps = if len == 0 {
                sources = self.sources();
                &sources[..]
            } else {
                self.level(len, stop)?
            };
            let target = |e: &super::cex::CexEntry| match &e.target[o] {
                Obs::List(Some(v)) => Some(v.clone()),
                _ => None,
            };
            let targets: Vec<Option<Vec<i32>>> = entries.iter().map(target).collect();
            let bases: Vec<&[i32]> = entries
                .iter()
                .map(|e| match &e.base[o] {
                    Obs::List(Some(v)) => v.as_slice(),
                    _ => &[],
                })
                .collect();
            if let Some(r) = reps.iter().find(|r| r.streams.iter().zip(&targets).all(|(s, t)| t.as_ref() == Some(s))) {
                return Ok(Some(OutputTerm::Replace(r.pipe.clone())));
            }
            let appended = |s: &[i32], b: &[i32], t: &Option<Vec<i32>>| {
                t.as_ref().is_some_and(|t| t.len() == b.len() + s.len() && t[..b.len()] == *b && t[b.len()..] == *s)
            };
            if let Some(r) = reps.iter().find(|r| r.streams.iter().zip(&bases).zip(&targets).all(|((s, b), t)| appended(s, b, t))) {
                return Ok(Some(OutputTerm::Append(r.pipe.clone())));
            }
            if len == 1 {
                for &c in &p.grammar.pool {
                    if bases.iter().zip(&targets).all(|(b, t)| appended(&[c], b, t)) {
                        return Ok(Some(OutputTerm::AddLast(c)));
                    }
                }
            }
            return Ok(None);
        }
        if len == 0 {
            return Ok(None);
        }
        let terminals = &p.terminals[o];
        let reps = self.level(len - 1, stop)?;
        for &term in terminals {
            for r in reps {
                let ok = r.streams.iter().zip(entries).all(|(s, e)| Obs::Scalar(term.eval(s)) == e.target[o]);
                if ok {
                    return Ok(Some(OutputTerm::Scalar(r.pipe.clone(), term)));
                }
            }
        }
        Ok(None)
    }
}
