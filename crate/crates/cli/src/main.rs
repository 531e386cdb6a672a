use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use latfrac::config;
use latfrac::experiments::{self, RunError, RunOptions};

/// Exit codes: 0 all asserted invariants passed, 1 invariants failed,
/// 2 numeric error, 3 IO error, 4 configuration error.
#[derive(Parser)]
#[command(name = "latfrac", version, about = "Time-fractional diffusion experiments on truncated lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        config_path: PathBuf,
        /// Output directory (overrides the config's [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (falls back to LATFRAC_THREADS, then all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Record that downstream comparisons may use 1e-12-relative float
        /// equality instead of byte equality.
        #[arg(long)]
        lenient: bool,
    },
    /// Parse and validate a config file without running it.
    Validate { config_path: PathBuf },
}

fn init_threads(requested: Option<usize>) -> Option<usize> {
    let n = requested.or_else(|| {
        std::env::var("LATFRAC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    n
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config_path } => match config::parse_config_file(&config_path) {
            Ok(cfg) => {
                println!("ok: {} experiment", cfg.kind.name());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(4)
            }
        },
        Command::Run {
            config_path,
            out,
            threads,
            lenient,
        } => {
            let cfg = match config::parse_config_file(&config_path) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(4);
                }
            };
            let threads = init_threads(threads);
            let out_dir = out
                .or_else(|| cfg.raw.output.as_ref().map(|o| PathBuf::from(&o.dir)))
                .unwrap_or_else(|| PathBuf::from("out"));
            let opts = RunOptions {
                out_dir,
                threads,
                lenient,
            };
            match experiments::run(&cfg, &opts) {
                Ok(summary) => {
                    for check in &summary.checks {
                        let status = if check.passed { "pass" } else { "FAIL" };
                        match (check.value, check.threshold) {
                            (Some(v), Some(t)) => {
                                println!("{status}  {} (value {v:.6e}, threshold {t:.6e})", check.name)
                            }
                            _ => println!("{status}  {}", check.name),
                        }
                    }
                    for w in &summary.warnings {
                        eprintln!("warning: {w}");
                    }
                    if summary.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(RunError::Config(e)) => {
                    eprintln!("{e}");
                    ExitCode::from(4)
                }
                Err(RunError::Numeric(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(RunError::Io(e)) => {
                    eprintln!("io error: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
