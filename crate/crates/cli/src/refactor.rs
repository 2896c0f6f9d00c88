use crate::options::{BoundsUsed, Options};
use crate::{read, write, CliError};
use loopstream::cegis::{synthesize, InvariantCheck, NoRefactoring};
use loopstream::codegen::{emit, emit_pattern_baseline, Baseline};
use loopstream::frontend::compile;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Refactored,
    NoRefactoring,
    /// Only the pattern baseline ran, and it matched.
    BaselineOnly,
    /// The file could not be read or parsed.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaselineOutcome {
    Rewritten,
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RefactorReport {
    pub input_path: String,
    pub outcome: Outcome,
    pub reason: Option<NoRefactoring>,
    pub error: Option<String>,
    pub pipeline_text: Option<String>,
    pub java_text: Option<String>,
    pub invariants: Option<Vec<String>>,
    pub baseline: Option<BaselineOutcome>,
    pub baseline_text: Option<String>,
    pub iterations: usize,
    pub counterexample_count: usize,
    pub elapsed_ms: u64,
    pub bounds_used: BoundsUsed,
    pub seed: u64,
}

/// A report together with the files it produced.
#[derive(Debug, Clone)]
pub struct RefactorRun {
    pub report: RefactorReport,
    pub written: Vec<PathBuf>,
}

impl RefactorReport {
    /// A report for a file that could not be processed.
    pub fn error(input_path: &str, message: String, opts: &Options) -> RefactorReport {
        RefactorReport { error: Some(message), ..RefactorReport::blank(input_path, Outcome::Error, opts) }
    }

    fn blank(input_path: &str, outcome: Outcome, opts: &Options) -> RefactorReport {
        RefactorReport {
            input_path: input_path.to_string(),
            outcome,
            reason: None,
            error: None,
            pipeline_text: None,
            java_text: None,
            invariants: None,
            baseline: None,
            baseline_text: None,
            iterations: 0,
            counterexample_count: 0,
            elapsed_ms: 0,
            bounds_used: opts.bounds_used(),
            seed: opts.seed,
        }
    }

    /// Process exit status: 0 when refactored, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Refactored | Outcome::BaselineOnly => 0,
            Outcome::NoRefactoring => 2,
            Outcome::Error => 1,
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let detail = match (&self.reason, &self.error) {
            (Some(r), _) => format!(": {r}"),
            (None, Some(e)) => format!(": {e}"),
            _ => String::new(),
        };
        format!(
            "{}: {:?}{detail} ({} iterations, {} counterexamples, {} ms)",
            self.input_path, self.outcome, self.iterations, self.counterexample_count, self.elapsed_ms
        )
    }
}

/// Runs the engine and the baseline on one program.
pub fn refactor_source(input_path: &str, source: &str, opts: &Options) -> Result<RefactorReport, CliError> {
    let start = Instant::now();
    let (ast, ir) = compile(source).map_err(|source| CliError::Frontend { path: input_path.to_string(), source })?;
    let cfg = opts.search_config();
    cfg.validate()?;
    let (baseline, baseline_text) = match emit_pattern_baseline(&ast) {
        Baseline::Rewritten(t) => (BaselineOutcome::Rewritten, Some(t)),
        Baseline::NoMatch => (BaselineOutcome::NoMatch, None),
    };
    if opts.baseline_only {
        let outcome = match baseline {
            BaselineOutcome::Rewritten => Outcome::BaselineOnly,
            BaselineOutcome::NoMatch => Outcome::NoRefactoring,
        };
        let mut report = RefactorReport { baseline: Some(baseline), baseline_text, ..RefactorReport::blank(input_path, outcome, opts) };
        if !opts.no_timing {
            report.elapsed_ms = start.elapsed().as_millis() as u64;
        }
        return Ok(report);
    }
    let syn = synthesize(&ir, &cfg);
    let mut report = RefactorReport {
        baseline: Some(baseline),
        baseline_text,
        iterations: syn.iterations,
        counterexample_count: syn.cex.len(),
        ..RefactorReport::blank(input_path, Outcome::Refactored, opts)
    };
    match &syn.result {
        Ok(r) => {
            report.pipeline_text = Some(r.candidate.to_text(&syn.outs, &syn.names));
            report.java_text = Some(emit(&r.candidate, &ir, &ast)?);
            if let InvariantCheck::Found(invs) = &r.invariants {
                report.invariants = Some(invs.iter().map(|i| i.describe(&ir)).collect());
            }
        }
        Err(reason) => {
            report.outcome = Outcome::NoRefactoring;
            report.reason = Some(reason.clone());
        }
    }
    if !opts.no_timing {
        report.elapsed_ms = start.elapsed().as_millis() as u64;
    }
    Ok(report)
}

/// Writes the refactored text and the baseline rewrite next to the input,
/// or into `opts.out_dir`.
pub fn write_outputs(input: &Path, report: &RefactorReport, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let dir = match &opts.out_dir {
        Some(d) => d.clone(),
        None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let stem = input.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let mut written = Vec::new();
    let mut put = |name: String, text: &str| -> Result<(), CliError> {
        let path = dir.join(name);
        write(&path, text)?;
        written.push(path);
        Ok(())
    };
    if let (true, Some(java)) = (opts.emit.java(), &report.java_text) {
        put(format!("{stem}.refactored.java"), java)?;
    }
    if let (true, Some(pipeline)) = (opts.emit.pipeline(), &report.pipeline_text) {
        put(format!("{stem}.refactored.pipeline"), &format!("{pipeline}\n"))?;
    }
    match (&report.baseline, &report.baseline_text) {
        (Some(BaselineOutcome::Rewritten), Some(text)) => put(format!("{stem}.baseline.java"), text)?,
        (Some(BaselineOutcome::NoMatch), _) => put(format!("{stem}.baseline.java"), "// NOMATCH\n")?,
        _ => {}
    }
    Ok(written)
}

/// Reads, refactors and writes output files for one program.
pub fn refactor_file(input: &Path, opts: &Options) -> Result<RefactorRun, CliError> {
    let source = read(input)?;
    let report = refactor_source(&input.display().to_string(), &source, opts)?;
    let written = write_outputs(input, &report, opts)?;
    Ok(RefactorRun { report, written })
}
