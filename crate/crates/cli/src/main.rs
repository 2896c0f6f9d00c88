use clap::{Args, Parser, Subcommand};
use loopstream_cli::{parse_values, refactor_file, run_corpus, verify_files, CliError, Emit, ModeArg, Options};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "loopstream", version, about = "Rewrites external-iteration loops as stream pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refactor one MiniJ file.
    Refactor {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Directory for output files (default: next to the input).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Run only the syntax-driven pattern rewriter.
        #[arg(long)]
        baseline_only: bool,
    },
    /// Refactor every .minij file in a directory and print a summary table.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Files processed at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check a pipeline-text file against a MiniJ program.
    Verify {
        file: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Time budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
    /// Longest list in the checked universe.
    #[arg(long, default_value_t = 4)]
    max_list_len: usize,
    /// Element and scalar values, `lo..hi` inclusive.
    #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
    values: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disable the genetic search.
    #[arg(long)]
    no_ga: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Equivalence)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Emit::Both)]
    emit: Emit,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Report elapsed time as 0.
    #[arg(long)]
    no_timing: bool,
}

impl Common {
    fn options(&self, out_dir: Option<PathBuf>) -> Result<Options, CliError> {
        if !self.timeout.is_finite() || self.timeout < 0.0 {
            return Err(CliError::Usage(format!("invalid timeout `{}`", self.timeout)));
        }
        let (lo, hi) = parse_values(&self.values)?;
        Ok(Options {
            timeout: Duration::from_secs_f64(self.timeout),
            max_list_len: self.max_list_len,
            lo,
            hi,
            seed: self.seed,
            use_ga: !self.no_ga,
            mode: self.mode,
            emit: self.emit,
            out_dir,
            no_timing: self.no_timing,
            baseline_only: false,
        })
    }
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> Result<(), CliError> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(value).expect("reports serialize");
        std::fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Refactor { file, common, out_dir, baseline_only } => {
            let opts = Options { baseline_only, ..common.options(out_dir)? };
            let run = refactor_file(&file, &opts)?;
            let r = &run.report;
            println!("{}", r.summary());
            if let (true, Some(b)) = (opts.baseline_only, &r.baseline_text) {
                print!("{b}");
            }
            if let (true, Some(p)) = (opts.emit.pipeline(), &r.pipeline_text) {
                println!("{p}");
            }
            if let (true, Some(j)) = (opts.emit.java(), &r.java_text) {
                print!("{j}");
            }
            write_json(&common.json, r)?;
            Ok(r.exit_code())
        }
        Command::Corpus { dir, common, out_dir, jobs } => {
            let opts = common.options(out_dir)?;
            let summary = run_corpus(&dir, &opts, jobs)?;
            print!("{}", summary.table());
            write_json(&common.json, &summary)?;
            Ok(0)
        }
        Command::Verify { file, candidate, common } => {
            let opts = common.options(None)?;
            let r = verify_files(&file, &candidate, &opts)?;
            println!("{}: {:?}", Path::new(&r.input_path).display(), r.verdict);
            if let Some(cex) = &r.counterexample {
                println!("counterexample: {}", cex.constructors.join("; "));
                println!("{}", serde_json::to_string_pretty(cex).expect("reports serialize"));
            }
            write_json(&common.json, &r)?;
            Ok(r.exit_code())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 means the engine found no refactoring.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
