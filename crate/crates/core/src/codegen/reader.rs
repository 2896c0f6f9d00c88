//! Reads emitted Java back into a candidate, so the text itself can be
//! verified.
//!
//! Only the statement forms the emitter writes are understood:
//! declarations, list copies, `clear`, `add`, and stream pipelines that
//! end in `collect(toList())`, `forEachOrdered(t::add)` or a terminal.

use super::rename_ident;
use crate::frontend::ir::IrProgram;
use crate::vcgen::{list_names, outputs, Candidate, CandidateError};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReadError {
    #[error("no method body found")]
    NoBody,
    #[error("unrecognized statement `{0}`")]
    Statement(String),
    #[error(transparent)]
    Candidate(#[from] CandidateError),
}

const TYPES: [&str; 4] = ["List<Integer>", "Integer", "int", "boolean"];

fn strip_copy_ctor(e: &str) -> Option<&str> {
    let rest = e.strip_prefix("new ArrayList<")?;
    let rest = &rest[rest.find(">(")? + 2..];
    rest.strip_suffix(')').map(str::trim)
}

/// The candidate denoted by the body of `java` for method `ir`.
pub fn read_java(java: &str, ir: &IrProgram) -> Result<Candidate, ReadError> {
    let code: String = java.lines().map(|l| l.split("//").next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    let open = code.find('{').ok_or(ReadError::NoBody)?;
    let close = code.rfind('}').ok_or(ReadError::NoBody)?;
    if close <= open {
        return Err(ReadError::NoBody);
    }
    let mut copies: BTreeMap<String, String> = BTreeMap::new();
    let mut cleared: BTreeSet<String> = BTreeSet::new();
    let mut lines = Vec::new();
    let rename = |e: &str, copies: &BTreeMap<String, String>| copies.iter().fold(e.to_string(), |acc, (c, o)| rename_ident(&acc, c, o));

    for stmt in code[open + 1..close].split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let stmt = stmt.split_whitespace().collect::<Vec<_>>().join(" ");
        if let Some(ty) = TYPES.iter().find(|t| stmt.starts_with(&format!("{t} "))) {
            let rest = &stmt[ty.len() + 1..];
            let Some((name, init)) = rest.split_once('=') else {
                continue;
            };
            let (name, init) = (name.trim(), init.trim());
            if let Some(src) = strip_copy_ctor(init) {
                if !src.is_empty() {
                    copies.insert(name.to_string(), src.to_string());
                }
                continue;
            }
            if !init.contains(".stream()") {
                continue;
            }
            let init = init.strip_prefix("(int)").map_or(init, str::trim);
            let init = init.strip_suffix(".collect(toList())").or_else(|| init.strip_suffix(".collect(Collectors.toList())")).unwrap_or(init);
            lines.push(format!("{} => {name}", rename(init, &copies)));
        } else if let Some(t) = stmt.strip_suffix(".clear()") {
            cleared.insert(t.trim().to_string());
        } else if let Some(head) = stmt.strip_suffix("::add)") {
            let (pipe, target) = head.rsplit_once(".forEachOrdered(").ok_or_else(|| ReadError::Statement(stmt.clone()))?;
            let pipe = rename(pipe, &copies);
            if cleared.contains(target) {
                lines.push(format!("{pipe} => {target}"));
            } else {
                lines.push(format!("{pipe}.forEachOrdered({target}::add)"));
            }
        } else if stmt.contains(".add(") {
            lines.push(stmt.clone());
        } else {
            return Err(ReadError::Statement(stmt));
        }
    }
    Ok(Candidate::parse(&lines.join("\n"), &outputs(ir), &list_names(ir))?)
}
