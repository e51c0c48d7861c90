//! `otacal` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use otacal::grouping::SchemeLabel;

use crate::config::ExperimentConfig;
use crate::experiment::{crb_sweep, run_experiment};
use crate::table::emit_csv;
use crate::BenchError;

/// Environment variable that caps the worker threads. It never changes
/// results.
pub const THREADS_ENV: &str = "OTACAL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "otacal", version, about = "Over-the-air reciprocity calibration benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep and write a CSV table.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock time (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Averaged CRB only, per SNR.
    Crb {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report the identifiability count of a configuration.
    Check { config: PathBuf },
    /// Describe the built-in grouping schemes.
    Schemes {
        #[arg(long)]
        list: bool,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), BenchError> {
    match cmd {
        Command::Run { config, out: path, seed, timing } => {
            let mut cfg = load(&config, seed)?;
            cfg.timing |= timing;
            let table = run_experiment(&cfg)?;
            emit_csv(&table, &path)?;
            writeln!(out, "wrote {} rows to {}", table.rows.len(), path.display())?;
        }
        Command::Crb { config, out: path, seed } => {
            let cfg = load(&config, seed)?;
            let table = crb_sweep(&cfg)?;
            match path {
                Some(p) => emit_csv(&table, &p)?,
                None => table.write_csv(&mut *out)?,
            }
        }
        Command::Check { config } => {
            let cfg = load(&config, None)?;
            match cfg.resolve() {
                Ok(r) => writeln!(out, "{}", r.identifiability)?,
                Err(BenchError::Unidentifiable(id)) => {
                    writeln!(out, "{id}")?;
                    return Err(BenchError::Unidentifiable(id));
                }
                Err(e) => return Err(e),
            }
        }
        Command::Schemes { list: _ } => {
            for l in SchemeLabel::ALL {
                writeln!(out, "{:<16} {}", l.name(), l.describe())?;
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), BenchError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize =
            v.parse().map_err(|_| BenchError::Config(format!("{THREADS_ENV} must be a positive integer")))?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parse `argv`, run, and return the exit status. Diagnostics go to
/// `err`, normal output to `out`.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version are not errors
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match configure_threads().and_then(|_| execute(cli.command, out)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "otacal: {e}");
            e.exit_code()
        }
    }
}
