use crate::options::{BoundsUsed, Options};
use crate::{read, CliError};
use loopstream::frontend::compile;
use loopstream::heap::Universe;
use loopstream::par::Budget;
use loopstream::vcgen::{check_end_to_end, list_names, outputs, Candidate, Counterexample, VcError, Verdict, VerifyConfig};
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerifyVerdict {
    Pass,
    Fail,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub input_path: String,
    pub candidate_path: String,
    pub verdict: VerifyVerdict,
    pub counterexample: Option<Counterexample>,
    pub universe_size: u64,
    pub elapsed_ms: u64,
    pub bounds_used: BoundsUsed,
}

impl VerifyReport {
    /// 0 on Pass, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            VerifyVerdict::Pass => 0,
            VerifyVerdict::Fail | VerifyVerdict::Timeout => 2,
        }
    }
}

/// Checks a pipeline-text candidate against the original program.
pub fn verify_source(
    input_path: &str,
    source: &str,
    candidate_path: &str,
    candidate: &str,
    opts: &Options,
) -> Result<VerifyReport, CliError> {
    let start = Instant::now();
    let (_, ir) = compile(source).map_err(|source| CliError::Frontend { path: input_path.to_string(), source })?;
    let c = Candidate::parse(candidate, &outputs(&ir), &list_names(&ir))
        .map_err(|source| CliError::Candidate { path: candidate_path.to_string(), source })?;
    let u = Universe::new(&ir, &opts.bounds());
    let cfg = VerifyConfig { budget: Budget { deadline: Some(start + opts.timeout) }, ..VerifyConfig::default() };
    let (verdict, counterexample) = match check_end_to_end(&ir, &u, &c, &cfg) {
        Ok(Verdict::Pass) => (VerifyVerdict::Pass, None),
        Ok(Verdict::Fail(cex)) => (VerifyVerdict::Fail, Some(*cex)),
        Err(VcError::Timeout) => (VerifyVerdict::Timeout, None),
        Err(e) => return Err(e.into()),
    };
    Ok(VerifyReport {
        input_path: input_path.to_string(),
        candidate_path: candidate_path.to_string(),
        verdict,
        counterexample,
        universe_size: u.len(),
        elapsed_ms: if opts.no_timing { 0 } else { start.elapsed().as_millis() as u64 },
        bounds_used: opts.bounds_used(),
    })
}

pub fn verify_files(input: &Path, candidate: &Path, opts: &Options) -> Result<VerifyReport, CliError> {
    let source = read(input)?;
    let text = read(candidate)?;
    verify_source(&input.display().to_string(), &source, &candidate.display().to_string(), &text, opts)
}
