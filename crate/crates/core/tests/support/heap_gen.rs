//! Random heaps for the equivalence laws. A description fixes what each
//! reference variable sees; a realization lays it out with a random node
//! order and unreachable garbage, so equal descriptions give isomorphic
//! but physically different heaps.

use loopstream::heap::{heap_equiv, EquivSpec, Heap, ListObj, Node, NIL};
use loopstream::jst::ops::equal_lists;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefSpec {
    Null,
    Fresh(Vec<i32>),
    /// Same list object as an earlier variable.
    Alias(usize),
}

pub type Desc = Vec<RefSpec>;

pub fn desc(n: usize) -> impl Strategy<Value = Desc> {
    let fresh = prop::collection::vec(-1..=1i32, 0..=3).prop_map(RefSpec::Fresh);
    prop::collection::vec((0..10u8, fresh, any::<prop::sample::Index>()), n).prop_map(|specs| {
        specs
            .into_iter()
            .enumerate()
            .map(|(i, (kind, fresh, alias))| match kind {
                0 => RefSpec::Null,
                1 | 2 if i > 0 => RefSpec::Alias(alias.index(i)),
                _ => fresh,
            })
            .collect()
    })
}

/// The variable whose list `r` sees, or `None` for null.
fn owner(d: &Desc, r: usize) -> Option<usize> {
    match &d[r] {
        RefSpec::Null => None,
        RefSpec::Fresh(_) => Some(r),
        RefSpec::Alias(j) => owner(d, *j),
    }
}

fn contents(d: &Desc, r: usize) -> Option<&[i32]> {
    owner(d, r).map(|o| match &d[o] {
        RefSpec::Fresh(v) => v.as_slice(),
        _ => unreachable!(),
    })
}

pub fn realize(d: &Desc, seed: u64) -> Heap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Heap::with_refs(d.len());
    // (owner, position, value) for every live node, plus garbage.
    let mut cells: Vec<(Option<usize>, usize, i32)> = Vec::new();
    for (r, s) in d.iter().enumerate() {
        if let RefSpec::Fresh(v) = s {
            cells.extend(v.iter().enumerate().map(|(i, &x)| (Some(r), i, x)));
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        cells.push((None, 0, rng.gen_range(-1..=1)));
    }
    cells.shuffle(&mut rng);
    h.nodes = cells.iter().map(|&(_, _, value)| Node { value, next: NIL }).collect();
    let id = |o: usize, i: usize| cells.iter().position(|&(c, p, _)| c == Some(o) && p == i).map_or(NIL, |k| k as u32);
    for (k, &(o, i, _)) in cells.iter().enumerate() {
        if let Some(o) = o {
            h.nodes[k].next = id(o, i + 1);
        }
    }
    let mut owners: Vec<usize> = (0..d.len()).filter(|&r| matches!(d[r], RefSpec::Fresh(_))).collect();
    owners.shuffle(&mut rng);
    if rng.gen_bool(0.5) {
        h.lists.push(ListObj { head: NIL, mod_count: 0 });
    }
    let mut header = vec![NIL; d.len()];
    for o in owners {
        h.lists.push(ListObj { head: id(o, 0), mod_count: rng.gen_range(0..3) });
        header[o] = (h.lists.len() - 1) as u32;
    }
    for r in 0..d.len() {
        h.refs[r] = owner(d, r).map_or(NIL, |o| header[o]);
    }
    h
}

pub fn spec(n: usize) -> EquivSpec {
    EquivSpec { refs: (0..n).collect(), scalars: vec![] }
}

/// Equivalence decided on the descriptions alone: the same null and alias
/// pattern, and the same values behind every variable.
pub fn model_equiv(d1: &Desc, d2: &Desc) -> bool {
    (0..d1.len()).all(|r| {
        let same_alias = (0..d1.len()).all(|q| (owner(d1, r) == owner(d1, q)) == (owner(d2, r) == owner(d2, q)));
        same_alias && contents(d1, r) == contents(d2, r)
    })
}

/// Equivalence from pairwise `equal_lists` on the realized heaps plus the
/// alias pattern of the reference variables.
pub fn equal_lists_equiv(h1: &Heap, h2: &Heap) -> bool {
    let n = h1.refs.len();
    (0..n).all(|r| {
        let (a, b) = (h1.refs[r], h2.refs[r]);
        let pattern = (0..n).all(|q| (h1.refs[q] == a) == (h2.refs[q] == b));
        let lists = match (a == NIL, b == NIL) {
            (true, true) => true,
            (false, false) => equal_lists(h1, h1.lists[a as usize].head, NIL, h2, h2.lists[b as usize].head, NIL),
            _ => false,
        };
        pattern && lists
    })
}

/// All laws on one pair: reflexivity (on the heap and on a second layout),
/// symmetry, and agreement with both independent deciders.
pub fn check_pair(d1: &Desc, d2: &Desc, s1: u64, s2: u64) -> Result<(), String> {
    let n = d1.len();
    let (h1, h2) = (realize(d1, s1), realize(d2, s2));
    let h1b = realize(d1, s1 ^ 0x9e37_79b9);
    let sp = spec(n);
    let e = heap_equiv(&h1, &h2, &sp);
    let fail = |what: &str| Err(format!("{what}: {d1:?} / {d2:?}"));
    if !heap_equiv(&h1, &h1, &sp) || !heap_equiv(&h1, &h1b, &sp) {
        return fail("reflexivity");
    }
    if e != heap_equiv(&h2, &h1, &sp) {
        return fail("symmetry");
    }
    if e != model_equiv(d1, d2) {
        return fail("model agreement");
    }
    if e != equal_lists_equiv(&h1, &h2) {
        return fail("equal_lists agreement");
    }
    Ok(())
}

/// Transitivity on a triple.
pub fn check_triple(d: [&Desc; 3], s: [u64; 3]) -> Result<(), String> {
    let sp = spec(d[0].len());
    let h: Vec<Heap> = (0..3).map(|i| realize(d[i], s[i])).collect();
    let eq = |a: usize, b: usize| heap_equiv(&h[a], &h[b], &sp);
    if eq(0, 1) && eq(1, 2) && !eq(0, 2) {
        return Err(format!("transitivity: {d:?}"));
    }
    Ok(())
}
