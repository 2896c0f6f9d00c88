//! Canonical JSON snapshots of states, for counterexample reports.

use super::{ProgramState, Status, Universe, NIL};
use crate::frontend::ir::Value;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A node of the snapshot graph. List headers have no value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub id: u32,
    pub value: Option<i32>,
    pub next: Option<u32>,
}

/// Nodes are numbered in first-reachable order, visiting references by
/// name, so equivalent heaps serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub refs: BTreeMap<String, Option<u32>>,
    pub nodes: Vec<NodeSnapshot>,
    pub scalars: BTreeMap<String, serde_json::Value>,
    pub status: String,
}

impl Snapshot {
    /// Snapshot of the compared part of `st`.
    pub fn of(u: &Universe, st: &ProgramState) -> Snapshot {
        let heap = &st.heap;
        let mut names: Vec<(&str, usize)> = u.spec.refs.iter().map(|&s| (u.ref_names[s].as_str(), s)).collect();
        names.sort();
        let mut ids: BTreeMap<(bool, u32), u32> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut refs = BTreeMap::new();
        for (name, slot) in names {
            let h = heap.refs[slot];
            if h == NIL {
                refs.insert(name.to_string(), None);
                continue;
            }
            if let Some(&id) = ids.get(&(true, h)) {
                refs.insert(name.to_string(), Some(id));
                continue;
            }
            let hid = nodes.len() as u32;
            ids.insert((true, h), hid);
            refs.insert(name.to_string(), Some(hid));
            nodes.push(NodeSnapshot { id: hid, value: None, next: None });
            let mut prev = hid as usize;
            let mut cur = heap.lists[h as usize].head;
            while cur != NIL {
                if let Some(&id) = ids.get(&(false, cur)) {
                    nodes[prev].next = Some(id);
                    break;
                }
                let id = nodes.len() as u32;
                ids.insert((false, cur), id);
                nodes[prev].next = Some(id);
                let n = heap.nodes[cur as usize];
                nodes.push(NodeSnapshot { id, value: Some(n.value), next: None });
                prev = id as usize;
                cur = n.next;
            }
        }
        let scalars = u
            .spec
            .scalars
            .iter()
            .map(|&s| {
                let v = match st.scalars[s] {
                    Value::Int(i) => serde_json::Value::from(i),
                    Value::Bool(b) => serde_json::Value::from(b),
                    Value::Null => serde_json::Value::Null,
                };
                (u.scalar_names[s].clone(), v)
            })
            .collect();
        let status = match st.status {
            Status::Normal => "normal".to_string(),
            Status::Exception(k) => k.to_string(),
            Status::OutOfFuel => "out of fuel".to_string(),
        };
        Snapshot { refs, nodes, scalars, status }
    }

    /// The list a reference points to, as values.
    pub fn list(&self, name: &str) -> Option<Vec<i32>> {
        let mut cur = self.nodes[(*self.refs.get(name)?)? as usize].next;
        let mut out = Vec::new();
        while let Some(id) = cur {
            let n = &self.nodes[id as usize];
            out.push(n.value?);
            cur = n.next;
        }
        Some(out)
    }
}
