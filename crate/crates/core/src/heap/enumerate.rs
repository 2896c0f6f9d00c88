//! The bounded universe of pre-states and its constructor encoding.

use super::equiv::EquivSpec;
use super::{Heap, ListObj, ProgramState, NIL};
use crate::frontend::ast::Type;
use crate::frontend::ir::{IrProgram, Value, VarKind};
use serde::Serialize;
use thiserror::Error;

/// Size of the pre-state universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_len: usize,
    /// Element and scalar values, distinct, in enumeration order.
    pub values: Vec<i32>,
    /// Give every list parameter an outside alias (`l'`) that must observe
    /// the same changes as `l`.
    pub aliasing: bool,
    /// Also enumerate states where list parameters share one list.
    pub share_params: bool,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds { max_len: 4, values: by_magnitude(-3, 3), aliasing: true, share_params: false }
    }
}

impl Bounds {
    pub fn new(max_len: usize, lo: i32, hi: i32) -> Bounds {
        Bounds { max_len, values: by_magnitude(lo, hi), ..Bounds::default() }
    }
}

/// `lo..=hi` ordered 0, 1, -1, 2, -2, ... so that small values come first
/// and counterexamples stay small.
pub fn by_magnitude(lo: i32, hi: i32) -> Vec<i32> {
    let mut v: Vec<i32> = (lo..=hi).collect();
    v.sort_by_key(|&x| ((x as i64).abs(), x < 0));
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructorError {
    #[error("malformed constructor `{0}`")]
    Malformed(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, Copy)]
enum Param {
    Scalar(usize),
    /// Index into `list_params`.
    List(usize),
}

/// Deterministic enumeration of every pre-state of one program within the
/// bounds. States are numbered in mixed radix with the first parameter
/// most significant; list shapes are ordered by length, then
/// lexicographically by value.
#[derive(Debug, Clone)]
pub struct Universe {
    pub bounds: Bounds,
    n_scalars: usize,
    n_iters: usize,
    /// Names of the reference slots: program lists, then outside aliases.
    pub ref_names: Vec<String>,
    /// Names of the scalar slots.
    pub scalar_names: Vec<String>,
    /// Slots compared by state equivalence.
    pub spec: EquivSpec,
    params: Vec<Param>,
    /// (name, ref slot, outside alias slot).
    list_params: Vec<(String, usize, Option<usize>)>,
    scalar_params: Vec<(String, usize)>,
    /// `shape_offsets[n]` is the number of shapes shorter than `n`.
    shape_offsets: Vec<u64>,
    /// Sharing patterns: representative list parameter per list parameter.
    patterns: Vec<Vec<usize>>,
    /// Cumulative start index of each pattern.
    pattern_starts: Vec<u64>,
    /// Per pattern: digit radices and place values.
    pattern_digits: Vec<(Vec<u64>, Vec<u64>)>,
    total: u64,
}

impl Universe {
    pub fn new(ir: &IrProgram, bounds: &Bounds) -> Universe {
        assert!(!bounds.values.is_empty(), "value set must not be empty");
        let mut ref_names = vec![String::new(); ir.n_lists];
        let mut scalar_names = vec![String::new(); ir.n_scalars];
        for v in &ir.vars {
            match v.ty {
                Type::List => ref_names[v.slot] = v.name.clone(),
                Type::Iterator => {}
                _ => scalar_names[v.slot] = v.name.clone(),
            }
        }
        let mut params = Vec::new();
        let mut list_params = Vec::new();
        let mut scalar_params = Vec::new();
        for &p in &ir.params {
            let info = ir.var(p);
            if info.ty == Type::List {
                let alias = bounds.aliasing.then(|| {
                    ref_names.push(format!("{}'", info.name));
                    ref_names.len() - 1
                });
                params.push(Param::List(list_params.len()));
                list_params.push((info.name.clone(), info.slot, alias));
            } else {
                params.push(Param::Scalar(info.slot));
                scalar_params.push((info.name.clone(), info.slot));
            }
        }

        let mut spec = EquivSpec::default();
        for &o in &ir.outputs {
            let info = ir.var(o);
            if info.ty == Type::List {
                spec.refs.push(info.slot);
            } else {
                spec.scalars.push(info.slot);
            }
        }
        spec.refs.extend(list_params.iter().filter_map(|p| p.2));
        debug_assert!(ir.outputs.iter().all(|&o| ir.var(o).kind != VarKind::Temp));

        let v = bounds.values.len() as u64;
        let mut shape_offsets = vec![0u64];
        let mut width = 1u64;
        for _ in 0..=bounds.max_len {
            let last = *shape_offsets.last().expect("nonempty");
            shape_offsets.push(last + width);
            width *= v;
        }

        let patterns = sharing_patterns(list_params.len(), bounds.share_params);
        let mut u = Universe {
            bounds: bounds.clone(),
            n_scalars: ir.n_scalars,
            n_iters: ir.n_iters,
            ref_names,
            scalar_names,
            spec,
            params,
            list_params,
            scalar_params,
            shape_offsets,
            patterns,
            pattern_starts: Vec::new(),
            pattern_digits: Vec::new(),
            total: 0,
        };
        let mut start = 0;
        for k in 0..u.patterns.len() {
            u.pattern_starts.push(start);
            let radices = u.radices(k);
            let mut places = vec![1u64; radices.len()];
            for i in (0..radices.len().saturating_sub(1)).rev() {
                places[i] = places[i + 1] * radices[i + 1];
            }
            start += radices.iter().product::<u64>();
            u.pattern_digits.push((radices, places));
        }
        u.total = start;
        u
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn n_shapes(&self) -> u64 {
        *self.shape_offsets.last().expect("nonempty")
    }

    /// One digit per parameter that owns its value under pattern `k`.
    fn radices(&self, k: usize) -> Vec<u64> {
        let pat = &self.patterns[k];
        self.params
            .iter()
            .filter_map(|p| match *p {
                Param::Scalar(_) => Some(self.bounds.values.len() as u64),
                Param::List(i) => (pat[i] == i).then(|| self.n_shapes()),
            })
            .collect()
    }

    /// A state with every slot empty.
    pub fn blank(&self) -> ProgramState {
        ProgramState::new(self.n_scalars, self.ref_names.len(), self.n_iters)
    }

    /// Values of shape number `k`.
    pub fn shape(&self, k: u64, out: &mut Vec<i32>) {
        out.clear();
        let len = self.shape_offsets.partition_point(|&o| o <= k) - 1;
        let mut r = k - self.shape_offsets[len];
        let v = self.bounds.values.len() as u64;
        out.resize(len, 0);
        for slot in out.iter_mut().rev() {
            *slot = self.bounds.values[(r % v) as usize];
            r /= v;
        }
    }

    /// Writes state number `idx` into `st`, reusing its buffers.
    pub fn state_at(&self, idx: u64, st: &mut ProgramState) {
        assert!(idx < self.total, "state index out of range");
        st.scalars.clear();
        st.scalars.resize(self.n_scalars, Value::Int(0));
        st.iters.clear();
        st.iters.resize(self.n_iters, None);
        st.status = super::Status::Normal;
        let heap = &mut st.heap;
        heap.nodes.clear();
        heap.lists.clear();
        heap.refs.clear();
        heap.refs.resize(self.ref_names.len(), NIL);

        let k = self.pattern_starts.partition_point(|&s| s <= idx) - 1;
        let rest = idx - self.pattern_starts[k];
        let pat = &self.patterns[k];
        let (radices, places) = &self.pattern_digits[k];
        let mut d = 0;
        for p in &self.params {
            let digit = |d: usize| (rest / places[d]) % radices[d];
            match *p {
                Param::Scalar(slot) => {
                    st.scalars[slot] = Value::Int(self.bounds.values[digit(d) as usize]);
                    d += 1;
                }
                Param::List(i) if pat[i] == i => {
                    heap.refs[self.list_params[i].1] = self.build_shape(heap, digit(d));
                    d += 1;
                }
                Param::List(_) => {}
            }
        }
        for (i, (_, slot, alias)) in self.list_params.iter().enumerate() {
            let h = heap.refs[self.list_params[pat[i]].1];
            heap.refs[*slot] = h;
            if let Some(a) = alias {
                heap.refs[*a] = h;
            }
        }
    }

    /// Allocates shape number `k` as a fresh list.
    fn build_shape(&self, heap: &mut Heap, k: u64) -> u32 {
        let len = self.shape_offsets.partition_point(|&o| o <= k) - 1;
        let mut r = k - self.shape_offsets[len];
        let v = self.bounds.values.len() as u64;
        let mut next = NIL;
        for _ in 0..len {
            heap.nodes.push(super::Node { value: self.bounds.values[(r % v) as usize], next });
            next = (heap.nodes.len() - 1) as u32;
            r /= v;
        }
        heap.lists.push(ListObj { head: next, mod_count: len as u32 });
        (heap.lists.len() - 1) as u32
    }

    pub fn state(&self, idx: u64) -> ProgramState {
        let mut st = self.blank();
        self.state_at(idx, &mut st);
        st
    }

    /// The constructor sequence that builds a pre-state.
    pub fn constructors(&self, st: &ProgramState) -> Vec<String> {
        let mut out = Vec::new();
        let mut built: Vec<(u32, &str)> = Vec::new();
        for p in &self.params {
            match *p {
                Param::Scalar(slot) => {
                    let name = &self.scalar_names[slot];
                    out.push(format!("assign {name} {}", st.scalars[slot]));
                }
                Param::List(i) => {
                    let (name, slot, _) = &self.list_params[i];
                    let h = st.heap.refs[*slot];
                    if let Some((_, rep)) = built.iter().find(|(b, _)| *b == h) {
                        out.push(format!("alias h {name} {rep}"));
                        continue;
                    }
                    out.push(format!("new h {name}"));
                    for (j, v) in st.heap.values(h).enumerate() {
                        out.push(format!("add h {name} {j} {v}"));
                    }
                    built.push((h, name));
                }
            }
        }
        for (name, _, alias) in &self.list_params {
            if let Some(a) = alias {
                out.push(format!("alias h {} {name}", self.ref_names[*a]));
            }
        }
        out
    }

    /// Rebuilds a pre-state from its constructor sequence.
    pub fn replay(&self, constructors: &[String]) -> Result<ProgramState, ConstructorError> {
        let mut st = self.blank();
        let malformed = |c: &str| ConstructorError::Malformed(c.to_string());
        let ref_slot = |name: &str| {
            self.ref_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| ConstructorError::UnknownVariable(name.to_string()))
        };
        for c in constructors {
            let words: Vec<&str> = c.split_whitespace().collect();
            match words.as_slice() {
                ["new", "h", name] => {
                    let slot = ref_slot(name)?;
                    st.heap.refs[slot] = build_list(&mut st.heap, &[]);
                }
                ["add", "h", name, i, v] => {
                    let h = st.heap.refs[ref_slot(name)?];
                    let i: usize = i.parse().map_err(|_| malformed(c))?;
                    let v: i32 = v.parse().map_err(|_| malformed(c))?;
                    if h == NIL || i > st.heap.len(h) {
                        return Err(malformed(c));
                    }
                    st.heap.insert(h, i, v);
                }
                ["alias", "h", dst, src] => {
                    let h = st.heap.refs[ref_slot(src)?];
                    st.heap.refs[ref_slot(dst)?] = h;
                }
                ["assign", name, v] => {
                    let slot = self
                        .scalar_names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| ConstructorError::UnknownVariable(name.to_string()))?;
                    st.scalars[slot] = match *v {
                        "null" => Value::Null,
                        "true" => Value::Bool(true),
                        "false" => Value::Bool(false),
                        _ => Value::Int(v.parse().map_err(|_| malformed(c))?),
                    };
                }
                _ => return Err(malformed(c)),
            }
        }
        Ok(st)
    }

    /// Names of the list parameters, in declaration order.
    pub fn list_param_names(&self) -> impl Iterator<Item = &str> {
        self.list_params.iter().map(|p| p.0.as_str())
    }

    pub fn scalar_param_names(&self) -> impl Iterator<Item = &str> {
        self.scalar_params.iter().map(|p| p.0.as_str())
    }
}

/// A header over fresh nodes, as built by `new` followed by `add`s.
fn build_list(heap: &mut Heap, values: &[i32]) -> u32 {
    let head = heap.chain(values.iter().copied());
    heap.lists.push(ListObj { head, mod_count: values.len() as u32 });
    (heap.lists.len() - 1) as u32
}

/// Set partitions of `n` list parameters as representative maps; the
/// all-distinct pattern comes first.
fn sharing_patterns(n: usize, share: bool) -> Vec<Vec<usize>> {
    let distinct: Vec<usize> = (0..n).collect();
    if !share || n < 2 {
        return vec![distinct];
    }
    let mut out = vec![distinct.clone()];
    // Restricted growth strings, mapped to the first member of each block.
    let mut rgs = vec![0usize; n];
    loop {
        let reps: Vec<usize> = (0..n).map(|i| rgs.iter().position(|&b| b == rgs[i]).expect("self")).collect();
        if reps != distinct {
            out.push(reps);
        }
        // Next restricted growth string.
        let mut i = n - 1;
        loop {
            let max_prev = rgs[..i].iter().copied().max().unwrap_or(0);
            if i > 0 && rgs[i] <= max_prev {
                rgs[i] += 1;
                for r in &mut rgs[i + 1..] {
                    *r = 0;
                }
                break;
            }
            if i <= 1 {
                return out;
            }
            i -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;

    fn universe(src: &str, bounds: Bounds) -> Universe {
        let (_, ir) = compile(src).unwrap();
        Universe::new(&ir, &bounds)
    }

    fn small(max_len: usize) -> Bounds {
        Bounds { max_len, values: vec![0, 1], aliasing: false, share_params: false }
    }

    #[test]
    fn counts() {
        let u = universe("void f(List<Integer> l) { l.add(1); }", small(1));
        assert_eq!(u.len(), 3);
        let lists: Vec<_> = (0..3).map(|i| u.state(i).list(0).unwrap()).collect();
        assert_eq!(lists, [vec![], vec![0], vec![1]]);

        let u = universe("void f(List<Integer> l, int k) { l.add(k); }", small(1));
        assert_eq!(u.len(), 6);
        let u = universe("void f(List<Integer> l) { l.add(1); }", small(0));
        assert_eq!(u.len(), 1);
    }

    #[test]
    fn first_param_is_most_significant() {
        let u = universe("void f(int a, List<Integer> l) { l.add(a); }", small(1));
        let s = u.state(3);
        assert_eq!(s.scalars[0], Value::Int(1));
        assert_eq!(s.list(0).unwrap(), Vec::<i32>::new());
    }

    #[test]
    fn values_by_magnitude() {
        assert_eq!(by_magnitude(-3, 3), [0, 1, -1, 2, -2, 3, -3]);
        assert_eq!(by_magnitude(1, 3), [1, 2, 3]);
    }

    #[test]
    fn sharing_patterns_are_bell_numbers() {
        assert_eq!(sharing_patterns(1, true).len(), 1);
        assert_eq!(sharing_patterns(2, true).len(), 2);
        assert_eq!(sharing_patterns(3, true).len(), 5);
        assert_eq!(sharing_patterns(4, true).len(), 15);
        assert_eq!(sharing_patterns(3, true)[0], vec![0, 1, 2]);
    }

    #[test]
    fn shared_params_point_to_one_list() {
        let b = Bounds { share_params: true, ..small(1) };
        let u = universe("void f(List<Integer> a, List<Integer> b) { a.add(1); b.add(2); }", b);
        assert_eq!(u.len(), 9 + 3);
        let s = u.state(10);
        assert_eq!(s.heap.refs[0], s.heap.refs[1]);
        assert_eq!(s.list(0).unwrap(), [0]);
    }

    #[test]
    fn outside_alias_and_replay() {
        let u = universe("void f(List<Integer> l) { l.add(1); }", Bounds::default());
        assert_eq!(u.ref_names, ["l", "l'"]);
        for idx in [0, 1, 100, u.len() - 1] {
            let s = u.state(idx);
            assert_eq!(s.heap.refs[0], s.heap.refs[1]);
            let cs = u.constructors(&s);
            let r = u.replay(&cs).unwrap();
            assert!(super::super::state_equiv(&s, &r, &u.spec), "{cs:?}");
        }
        let s = u.state(u.len() - 1);
        assert_eq!(
            u.constructors(&s),
            ["new h l", "add h l 0 -3", "add h l 1 -3", "add h l 2 -3", "add h l 3 -3", "alias h l' l"]
        );
    }
}
