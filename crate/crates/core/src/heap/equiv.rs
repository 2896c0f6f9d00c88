//! Heap and state equivalence: isomorphism of the subgraphs reachable from
//! the shared reference variables.

use super::{Heap, ProgramState, Status, NIL};

/// What two states must agree on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivSpec {
    /// Shared reference slots. Iterators are never part of this set.
    pub refs: Vec<usize>,
    /// Compared scalar slots.
    pub scalars: Vec<usize>,
}

/// Partial bijection kept as a pair list; reachable graphs are tiny.
#[derive(Default)]
struct Bijection(Vec<(u32, u32)>);

impl Bijection {
    /// `Some(true)` if newly added, `Some(false)` if already present,
    /// `None` if it conflicts with an existing pair.
    fn relate(&mut self, a: u32, b: u32) -> Option<bool> {
        for &(x, y) in &self.0 {
            if x == a || y == b {
                return if x == a && y == b { Some(false) } else { None };
            }
        }
        self.0.push((a, b));
        Some(true)
    }
}

pub fn heap_equiv(h1: &Heap, h2: &Heap, spec: &EquivSpec) -> bool {
    let mut headers = Bijection::default();
    let mut nodes = Bijection::default();
    for &r in &spec.refs {
        let (a, b) = (h1.refs[r], h2.refs[r]);
        if a == NIL || b == NIL {
            if a != b {
                return false;
            }
            continue;
        }
        match headers.relate(a, b) {
            None => return false,
            Some(false) => continue,
            Some(true) => {}
        }
        let (mut x, mut y) = (h1.lists[a as usize].head, h2.lists[b as usize].head);
        loop {
            if x == NIL || y == NIL {
                if x != y {
                    return false;
                }
                break;
            }
            match nodes.relate(x, y) {
                None => return false,
                // The rest of both chains was already matched.
                Some(false) => break,
                Some(true) => {}
            }
            let (nx, ny) = (h1.nodes[x as usize], h2.nodes[y as usize]);
            if nx.value != ny.value {
                return false;
            }
            x = nx.next;
            y = ny.next;
        }
    }
    true
}

/// Both states must have terminated normally.
pub fn state_equiv(a: &ProgramState, b: &ProgramState, spec: &EquivSpec) -> bool {
    debug_assert!(a.status == Status::Normal && b.status == Status::Normal);
    spec.scalars.iter().all(|&s| a.scalars[s] == b.scalars[s]) && heap_equiv(&a.heap, &b.heap, spec)
}
