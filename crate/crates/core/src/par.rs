//! Data-parallel sweeps over state indices.
//!
//! The index range is split into fixed chunks; each chunk is scanned in
//! order with per-worker scratch space. Results are merged by chunk order,
//! so the outcome never depends on scheduling. Without the `parallel`
//! feature, or after `set_sequential(true)`, the chunks run one after
//! another on the calling thread.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces every later sweep in this process onto the calling thread.
pub fn set_sequential(on: bool) {
    SEQUENTIAL.store(on, Ordering::Relaxed);
}

/// Whether sweeps fan out over worker threads.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::Relaxed)
}

/// States per chunk.
pub const CHUNK: u64 = 2048;

/// Stops a sweep once the deadline has passed.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget { deadline: None }
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Raised when a sweep runs out of time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("time budget exhausted")]
pub struct OutOfTime;

fn n_chunks(n: u64) -> u64 {
    n.div_ceil(CHUNK)
}

fn chunk_range(c: u64, n: u64) -> std::ops::Range<u64> {
    c * CHUNK..((c + 1) * CHUNK).min(n)
}

/// The smallest index in `0..n` for which `check` reports a failure.
pub fn first_failure<S, F, T>(n: u64, budget: Budget, init: impl Fn() -> S + Sync + Send, check: F) -> Result<Option<(u64, T)>, OutOfTime>
where
    F: Fn(&mut S, u64) -> Option<T> + Sync + Send,
    T: Send,
{
    let scan = |s: &mut S, c: u64| -> Result<Option<(u64, T)>, OutOfTime> {
        if budget.expired() {
            return Err(OutOfTime);
        }
        Ok(chunk_range(c, n).find_map(|i| check(s, i).map(|t| (i, t))))
    };
    first_failure_impl(n_chunks(n), init, scan)
}

fn first_failure_impl<S, T>(
    chunks: u64,
    init: impl Fn() -> S + Sync + Send,
    scan: impl Fn(&mut S, u64) -> Result<Option<T>, OutOfTime> + Sync + Send,
) -> Result<Option<T>, OutOfTime>
where
    T: Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return first_failure_par(chunks, init, scan);
    }
    first_failure_seq(chunks, init, scan)
}

#[cfg(feature = "parallel")]
fn first_failure_par<S, T>(
    chunks: u64,
    init: impl Fn() -> S + Sync + Send,
    scan: impl Fn(&mut S, u64) -> Result<Option<T>, OutOfTime> + Sync + Send,
) -> Result<Option<T>, OutOfTime>
where
    T: Send,
{
    use rayon::prelude::*;
    // `find_map_first` returns the hit with the smallest chunk number even
    // when a later chunk finishes first.
    (0..chunks)
        .into_par_iter()
        .map_init(&init, |s, c| scan(s, c))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

fn first_failure_seq<S, T>(
    chunks: u64,
    init: impl Fn() -> S,
    scan: impl Fn(&mut S, u64) -> Result<Option<T>, OutOfTime>,
) -> Result<Option<T>, OutOfTime> {
    let mut s = init();
    for c in 0..chunks {
        if let Some(hit) = scan(&mut s, c)? {
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

/// Folds every index in `0..n` into a per-chunk accumulator and merges the
/// accumulators in chunk order.
pub fn fold<S, A, F, M>(
    n: u64,
    budget: Budget,
    init: impl Fn() -> S + Sync + Send,
    empty: impl Fn() -> A + Sync + Send,
    step: F,
    merge: M,
) -> Result<A, OutOfTime>
where
    F: Fn(&mut S, &mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
    A: Send,
{
    let scan = |s: &mut S, c: u64| -> Result<A, OutOfTime> {
        if budget.expired() {
            return Err(OutOfTime);
        }
        let mut acc = empty();
        for i in chunk_range(c, n) {
            step(s, &mut acc, i);
        }
        Ok(acc)
    };
    fold_impl(n_chunks(n), init, &empty, scan, merge)
}

fn fold_impl<S, A>(
    chunks: u64,
    init: impl Fn() -> S + Sync + Send,
    empty: &(impl Fn() -> A + Sync + Send),
    scan: impl Fn(&mut S, u64) -> Result<A, OutOfTime> + Sync + Send,
    merge: impl Fn(A, A) -> A + Sync + Send,
) -> Result<A, OutOfTime>
where
    A: Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return fold_par(chunks, init, empty, scan, merge);
    }
    fold_seq(chunks, init, empty, scan, merge)
}

#[cfg(feature = "parallel")]
fn fold_par<S, A>(
    chunks: u64,
    init: impl Fn() -> S + Sync + Send,
    empty: &(impl Fn() -> A + Sync + Send),
    scan: impl Fn(&mut S, u64) -> Result<A, OutOfTime> + Sync + Send,
    merge: impl Fn(A, A) -> A + Sync + Send,
) -> Result<A, OutOfTime>
where
    A: Send,
{
    use rayon::prelude::*;
    // `reduce` keeps operand order, so `merge` sees chunks left to right.
    (0..chunks)
        .into_par_iter()
        .map_init(&init, |s, c| scan(s, c))
        .reduce(|| Ok(empty()), |a, b| Ok(merge(a?, b?)))
}

fn fold_seq<S, A>(
    chunks: u64,
    init: impl Fn() -> S,
    empty: &impl Fn() -> A,
    scan: impl Fn(&mut S, u64) -> Result<A, OutOfTime>,
    merge: impl Fn(A, A) -> A,
) -> Result<A, OutOfTime> {
    let mut s = init();
    let mut acc = empty();
    for c in 0..chunks {
        acc = merge(acc, scan(&mut s, c)?);
    }
    Ok(acc)
}

/// Worker threads a sweep may use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return rayon::current_num_threads();
    }
    1
}
