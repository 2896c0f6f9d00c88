//! Running the two searches against each other.

use super::Search;
use crate::vcgen::Candidate;
use serde::Serialize;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Enumerative,
    Genetic,
}

/// A search that polls its cancellation flag.
pub type Worker<'a> = &'a (dyn Fn(&AtomicBool) -> Search + Sync);

/// Outcome of a race.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RaceResult {
    Found(Strategy, Candidate),
    Exhausted,
    Stopped,
}

/// Decides how the two searches share time.
pub trait Scheduler: Sync {
    fn race(&self, enumerative: Worker<'_>, genetic: Option<Worker<'_>>) -> RaceResult;
}

/// Combines two finished searches. A candidate from each counts as a tie,
/// which the enumerative search wins.
fn settle(e: Search, g: Option<Search>) -> RaceResult {
    match (e, g) {
        (Search::Found(c), _) => RaceResult::Found(Strategy::Enumerative, c),
        (_, Some(Search::Found(c))) => RaceResult::Found(Strategy::Genetic, c),
        (Search::Exhausted, _) => RaceResult::Exhausted,
        (Search::Stopped, _) => RaceResult::Stopped,
        (Search::NoProgress, _) => RaceResult::Exhausted,
    }
}

/// Both searches run on their own threads; the first candidate written to
/// the result cell wins and cancels the other search. The enumerative
/// search ending without a candidate also ends the race, since nothing of
/// that length exists.
#[derive(Debug, Clone, Copy, Default)]
pub struct Threads;

impl Scheduler for Threads {
    fn race(&self, enumerative: Worker<'_>, genetic: Option<Worker<'_>>) -> RaceResult {
        let Some(genetic) = genetic else {
            return settle(enumerative(&AtomicBool::new(false)), None);
        };
        let cell: Mutex<Option<(Strategy, Candidate)>> = Mutex::new(None);
        let cancel = AtomicBool::new(false);
        let offer = |s: Strategy, c: Candidate| {
            let mut slot = cell.lock().expect("result cell");
            if slot.is_none() {
                *slot = Some((s, c));
            }
            cancel.store(true, Ordering::Relaxed);
        };
        let e = std::thread::scope(|scope| {
            scope.spawn(|| {
                if let Search::Found(c) = genetic(&cancel) {
                    offer(Strategy::Genetic, c);
                }
            });
            let e = enumerative(&cancel);
            match e {
                Search::Found(ref c) => offer(Strategy::Enumerative, c.clone()),
                // A disabled enumerative search leaves the genetic one to
                // run out its budget.
                Search::NoProgress => {}
                Search::Exhausted | Search::Stopped => cancel.store(true, Ordering::Relaxed),
            }
            e
        });
        match cell.into_inner().expect("result cell") {
            Some((s, c)) => RaceResult::Found(s, c),
            None => settle(e, None),
        }
    }
}

/// Runs the enumerative search, then the genetic one, on the calling
/// thread, as if both finished in the same quantum. Used to make races
/// reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lockstep;

impl Scheduler for Lockstep {
    fn race(&self, enumerative: Worker<'_>, genetic: Option<Worker<'_>>) -> RaceResult {
        let never = AtomicBool::new(false);
        let e = enumerative(&never);
        let g = genetic.map(|g| g(&never));
        settle(e, g)
    }
}
