use crate::options::Options;
use crate::refactor::{refactor_file, BaselineOutcome, Outcome, RefactorReport};
use crate::CliError;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusSummary {
    pub files: Vec<RefactorReport>,
    pub total: usize,
    /// Files the engine refactored.
    pub semantic: usize,
    /// Files the pattern baseline rewrote.
    pub baseline: usize,
    /// Files refactored by either.
    pub union: usize,
    pub errors: usize,
}

impl CorpusSummary {
    pub fn from_reports(files: Vec<RefactorReport>) -> CorpusSummary {
        let semantic = files.iter().filter(|r| r.outcome == Outcome::Refactored).count();
        let baseline = files.iter().filter(|r| r.baseline == Some(BaselineOutcome::Rewritten)).count();
        let union =
            files.iter().filter(|r| r.outcome == Outcome::Refactored || r.baseline == Some(BaselineOutcome::Rewritten)).count();
        let errors = files.iter().filter(|r| r.outcome == Outcome::Error).count();
        CorpusSummary { total: files.len(), semantic, baseline, union, errors, files }
    }

    /// Per-file rows followed by the totals.
    pub fn table(&self) -> String {
        let width = self.files.iter().map(|r| file_name(&r.input_path).len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<width$}  {:<14}  {:<9}  {:>10}  {:>5}\n", "file", "engine", "baseline", "iterations", "ms");
        for r in &self.files {
            let baseline = match r.baseline {
                Some(BaselineOutcome::Rewritten) => "Rewritten",
                Some(BaselineOutcome::NoMatch) => "NoMatch",
                None => "-",
            };
            let engine = format!("{:?}", r.outcome);
            let _ = writeln!(
                out,
                "{:<width$}  {engine:<14}  {baseline:<9}  {:>10}  {:>5}",
                file_name(&r.input_path),
                r.iterations,
                r.elapsed_ms
            );
        }
        let _ = writeln!(
            out,
            "engine {}/{}, baseline {}/{}, combined {}/{}, errors {}",
            self.semantic, self.total, self.baseline, self.total, self.union, self.total, self.errors
        );
        out
    }
}

fn file_name(path: &str) -> &str {
    Path::new(path).file_name().and_then(|s| s.to_str()).unwrap_or(path)
}

/// The `.minij` files of `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |source| CliError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "minij") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Refactors every file of `dir`, `jobs` files at a time. A file that
/// fails to load becomes an `Error` row.
pub fn run_corpus(dir: &Path, opts: &Options, jobs: usize) -> Result<CorpusSummary, CliError> {
    let files = corpus_files(dir)?;
    let one = |f: &PathBuf| match refactor_file(f, opts) {
        Ok(run) => run.report,
        Err(e) => RefactorReport::error(&f.display().to_string(), e.to_string(), opts),
    };
    let reports = if jobs <= 1 {
        files.iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(|| files.par_iter().map(one).collect())
    };
    Ok(CorpusSummary::from_reports(reports))
}
