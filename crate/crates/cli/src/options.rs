use crate::CliError;
use loopstream::cegis::{Mode, SearchConfig};
use loopstream::heap::Bounds;
use serde::Serialize;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Emit {
    Java,
    Pipeline,
    #[default]
    Both,
}

impl Emit {
    pub fn java(self) -> bool {
        self != Emit::Pipeline
    }

    pub fn pipeline(self) -> bool {
        self != Emit::Java
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ModeArg {
    #[default]
    Equivalence,
    Invariants,
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Options {
    pub timeout: Duration,
    pub max_list_len: usize,
    pub lo: i32,
    pub hi: i32,
    pub seed: u64,
    pub use_ga: bool,
    pub mode: ModeArg,
    pub emit: Emit,
    /// Where output files go; next to the input when unset.
    pub out_dir: Option<PathBuf>,
    /// Report `elapsedMs` as 0 so reports are reproducible.
    pub no_timing: bool,
    /// Run only the pattern baseline.
    pub baseline_only: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            timeout: Duration::from_secs(300),
            max_list_len: 4,
            lo: -3,
            hi: 3,
            seed: 0,
            use_ga: true,
            mode: ModeArg::Equivalence,
            emit: Emit::Both,
            out_dir: None,
            no_timing: false,
            baseline_only: false,
        }
    }
}

/// The bounds echoed in every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsUsed {
    pub max_list_len: usize,
    pub values: Vec<i32>,
}

impl Options {
    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.max_list_len, self.lo, self.hi)
    }

    pub fn bounds_used(&self) -> BoundsUsed {
        BoundsUsed { max_list_len: self.max_list_len, values: self.bounds().values }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            bounds: self.bounds(),
            use_ga: self.use_ga,
            timeout: self.timeout,
            seed: self.seed,
            mode: match self.mode {
                ModeArg::Equivalence => Mode::Equivalence,
                ModeArg::Invariants => Mode::Invariants,
            },
            post_check: false,
            ..SearchConfig::default()
        }
    }
}

/// Parses `lo..hi` (inclusive).
pub fn parse_values(s: &str) -> Result<(i32, i32), CliError> {
    let bad = || CliError::Usage(format!("invalid value range `{s}`, expected lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}
