//! Concrete heaps of singly linked integer lists, program states, the IR
//! interpreter and heap equivalence.
//!
//! A list object is a header that points at its first node. Reference
//! variables point at headers, so two variables alias exactly when they
//! name the same header. Nodes are never freed during a run; unreachable
//! nodes are ignored by every comparison.

mod enumerate;
mod equiv;
mod interp;
mod snapshot;

pub use enumerate::{by_magnitude, Bounds, ConstructorError, Universe};
pub use equiv::{heap_equiv, state_equiv, EquivSpec};
pub use interp::{exec, run, LoopEvent, NoObserver, Observer, DEFAULT_FUEL};
pub use snapshot::{NodeSnapshot, Snapshot};

use crate::frontend::ir::Value;
use serde::Serialize;

/// Absent node or header.
pub const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub value: i32,
    pub next: u32,
}

/// Header of one list object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListObj {
    pub head: u32,
    /// Structural modification counter, as in `java.util.ArrayList`.
    pub mod_count: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Heap {
    pub nodes: Vec<Node>,
    pub lists: Vec<ListObj>,
    /// Reference variable slot to header index, or `NIL` for null.
    pub refs: Vec<u32>,
}

impl Heap {
    pub fn with_refs(n: usize) -> Heap {
        Heap { nodes: Vec::new(), lists: Vec::new(), refs: vec![NIL; n] }
    }

    /// Allocates a header for the given values, copying them into fresh nodes.
    pub fn new_list(&mut self, values: &[i32]) -> u32 {
        let head = self.chain(values.iter().copied());
        self.lists.push(ListObj { head, mod_count: 0 });
        (self.lists.len() - 1) as u32
    }

    /// Allocates fresh nodes holding `values` in order; returns the first.
    pub fn chain(&mut self, values: impl DoubleEndedIterator<Item = i32>) -> u32 {
        let mut next = NIL;
        for value in values.rev() {
            self.nodes.push(Node { value, next });
            next = (self.nodes.len() - 1) as u32;
        }
        next
    }

    /// Node ids of the segment from `start` up to, not including, `end`.
    pub fn walk(&self, start: u32, end: u32) -> SegmentIter<'_> {
        SegmentIter { heap: self, cur: start, end }
    }

    pub fn values(&self, list: u32) -> impl Iterator<Item = i32> + '_ {
        self.walk(self.lists[list as usize].head, NIL).map(|n| self.nodes[n as usize].value)
    }

    pub fn to_vec(&self, list: u32) -> Vec<i32> {
        self.values(list).collect()
    }

    pub fn len(&self, list: u32) -> usize {
        self.walk(self.lists[list as usize].head, NIL).count()
    }

    /// The node at position `i`, if any.
    pub fn node_at(&self, list: u32, i: usize) -> Option<u32> {
        self.walk(self.lists[list as usize].head, NIL).nth(i)
    }

    pub fn get(&self, list: u32, i: usize) -> Option<i32> {
        self.node_at(list, i).map(|n| self.nodes[n as usize].value)
    }

    /// Inserts before position `i`; `i` must be at most the length.
    pub fn insert(&mut self, list: u32, i: usize, value: i32) {
        let next = match i {
            0 => self.lists[list as usize].head,
            _ => self.nodes[self.node_at(list, i - 1).expect("index checked") as usize].next,
        };
        self.nodes.push(Node { value, next });
        let id = (self.nodes.len() - 1) as u32;
        match i {
            0 => self.lists[list as usize].head = id,
            _ => {
                let prev = self.node_at(list, i - 1).expect("index checked");
                self.nodes[prev as usize].next = id;
            }
        }
        self.lists[list as usize].mod_count += 1;
    }

    pub fn push(&mut self, list: u32, value: i32) {
        let mut last = NIL;
        let mut cur = self.lists[list as usize].head;
        while cur != NIL {
            last = cur;
            cur = self.nodes[cur as usize].next;
        }
        self.nodes.push(Node { value, next: NIL });
        let id = (self.nodes.len() - 1) as u32;
        if last == NIL {
            self.lists[list as usize].head = id;
        } else {
            self.nodes[last as usize].next = id;
        }
        self.lists[list as usize].mod_count += 1;
    }

    /// Removes position `i`, which must exist, and returns its value.
    pub fn remove(&mut self, list: u32, i: usize) -> i32 {
        let node = self.node_at(list, i).expect("index checked");
        let Node { value, next } = self.nodes[node as usize];
        if i == 0 {
            self.lists[list as usize].head = next;
        } else {
            let prev = self.node_at(list, i - 1).expect("index checked");
            self.nodes[prev as usize].next = next;
        }
        self.lists[list as usize].mod_count += 1;
        value
    }

    pub fn clear(&mut self, list: u32) {
        let l = &mut self.lists[list as usize];
        l.head = NIL;
        l.mod_count += 1;
    }

    /// Replaces every element of `list` with fresh nodes holding `values`.
    pub fn replace_contents(&mut self, list: u32, values: &[i32]) {
        let head = self.chain(values.iter().copied());
        let l = &mut self.lists[list as usize];
        l.head = head;
        l.mod_count += 1;
    }
}

pub struct SegmentIter<'a> {
    heap: &'a Heap,
    cur: u32,
    end: u32,
}

impl Iterator for SegmentIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.cur == NIL || self.cur == self.end {
            return None;
        }
        let n = self.cur;
        self.cur = self.heap.nodes[n as usize].next;
        Some(n)
    }
}

/// Java runtime exceptions the interpreter can raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FaultKind {
    IndexOutOfBounds,
    NoSuchElement,
    IllegalState,
    ConcurrentModification,
    Arithmetic,
    NullPointer,
}

impl std::fmt::Display for FaultKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FaultKind::IndexOutOfBounds => "IndexOutOfBoundsException",
            FaultKind::NoSuchElement => "NoSuchElementException",
            FaultKind::IllegalState => "IllegalStateException",
            FaultKind::ConcurrentModification => "ConcurrentModificationException",
            FaultKind::Arithmetic => "ArithmeticException",
            FaultKind::NullPointer => "NullPointerException",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Normal,
    Exception(FaultKind),
    OutOfFuel,
}

/// `java.util.ArrayList.Itr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterState {
    pub list: u32,
    pub cursor: u32,
    /// Index of the element last returned by `next`, or -1.
    pub last_ret: i32,
    pub expected_mod: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramState {
    /// Indexed by scalar slot.
    pub scalars: Vec<Value>,
    pub heap: Heap,
    /// Indexed by iterator slot.
    pub iters: Vec<Option<IterState>>,
    pub status: Status,
}

impl ProgramState {
    pub fn new(n_scalars: usize, n_refs: usize, n_iters: usize) -> ProgramState {
        ProgramState {
            scalars: vec![Value::Int(0); n_scalars],
            heap: Heap::with_refs(n_refs),
            iters: vec![None; n_iters],
            status: Status::Normal,
        }
    }

    /// Values of the list a reference slot points to; `None` for null.
    pub fn list(&self, slot: usize) -> Option<Vec<i32>> {
        match self.heap.refs[slot] {
            NIL => None,
            h => Some(self.heap.to_vec(h)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_mutations() {
        let mut h = Heap::with_refs(1);
        let l = h.new_list(&[1, 2, 3]);
        h.insert(l, 0, 0);
        h.insert(l, 4, 4);
        h.insert(l, 2, 9);
        assert_eq!(h.to_vec(l), [0, 1, 9, 2, 3, 4]);
        assert_eq!(h.remove(l, 2), 9);
        assert_eq!(h.remove(l, 0), 0);
        h.push(l, 5);
        assert_eq!(h.to_vec(l), [1, 2, 3, 4, 5]);
        assert_eq!(h.get(l, 4), Some(5));
        assert_eq!(h.get(l, 5), None);
        h.clear(l);
        assert_eq!(h.len(l), 0);
        h.push(l, 7);
        assert_eq!(h.to_vec(l), [7]);
        assert_eq!(h.lists[l as usize].mod_count, 8);
    }
}
