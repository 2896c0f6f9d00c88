//! Driver for the refactoring engine: single files, whole corpora, and
//! standalone equivalence checks.

mod corpus;
mod options;
mod refactor;
mod verify;

pub use corpus::{run_corpus, CorpusSummary};
pub use options::{parse_values, Emit, ModeArg, Options};
pub use refactor::{refactor_file, refactor_source, write_outputs, BaselineOutcome, Outcome, RefactorReport, RefactorRun};
pub use verify::{verify_files, verify_source, VerifyReport, VerifyVerdict};

use loopstream::cegis::ConfigError;
use loopstream::codegen::CodegenError;
use loopstream::frontend::FrontendError;
use loopstream::vcgen::{CandidateError, VcError};
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Frontend { path: String, source: FrontendError },
    #[error("{path}: {source}")]
    Candidate { path: String, source: CandidateError },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Check(#[from] VcError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

pub(crate) fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
