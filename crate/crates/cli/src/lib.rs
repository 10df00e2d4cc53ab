//! Command-line front end: `run`, `list` and `selftest`.
//!
//! Exit codes: 0 success, 1 config or usage error, 2 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dmimo::experiments::{run_experiment, Default as KeyDefault, ExperimentConfig, ExperimentKind};
use dmimo::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dmimo",
    version,
    about = "Distributed massive MIMO channel and receiver experiments"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "DMIMO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List experiments and their required keys.
    List {
        /// Also print every optional key with its default.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Run the built-in property suite.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        if !dmimo::par::set_thread_count(k) {
            log::warn!("worker pool already initialized; --threads {k} ignored");
        }
    }
    match cli.command {
        Command::Run { config, out, seed } => run(config, out, seed),
        Command::List { verbose } => {
            list(verbose);
            EXIT_OK
        }
        Command::Selftest { seed } => selftest(seed),
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> i32 {
    let cfg = match ExperimentConfig::from_file(&config) {
        Ok(c) => c,
        Err(e @ Error::Io { .. }) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => return report(&e),
    };
    let cfg = match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    };
    let table = match run_experiment(&cfg) {
        Ok(t) => t,
        Err(e) => return report(&e),
    };
    let written = match &out {
        Some(path) => table.save_csv(path),
        None => table.write_csv(std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    if let Some(rt) = table.runtime {
        eprintln!("{}: {} rows in {:.2?}", cfg.experiment, table.rows.len(), rt);
    }
    EXIT_OK
}

fn list(verbose: bool) {
    let mut out = std::io::stdout().lock();
    for kind in ExperimentKind::ALL {
        let required: Vec<&str> = kind.schema().iter().filter(|s| s.required()).map(|s| s.name).collect();
        let _ = writeln!(
            out,
            "{:<22} required: {:<14} {}",
            kind.name(),
            required.join(", "),
            kind.description()
        );
        if verbose {
            for spec in kind.schema() {
                let default = match spec.default {
                    KeyDefault::Required => "(required)".to_string(),
                    KeyDefault::Num(x) => format!("{x}"),
                    KeyDefault::List(xs) => format!("{xs:?}"),
                    KeyDefault::Str(s) => format!("\"{s}\""),
                    KeyDefault::Bool(b) => format!("{b}"),
                };
                let _ = writeln!(out, "    {:<16} {:<22} {}", spec.name, default, spec.doc);
            }
        }
    }
}

fn selftest(seed: u64) -> i32 {
    let checks = match dmimo::selftest::run(seed) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    let mut failed = 0;
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed == 0 {
        EXIT_OK
    } else {
        eprintln!("{failed} of {} checks failed", checks.len());
        EXIT_RUNTIME
    }
}
