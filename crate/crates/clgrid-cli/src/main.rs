use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use clgrid_cli::{run, RunFlags, Scenario};

#[derive(Parser)]
#[command(
    name = "clgrid",
    version,
    about = "Damped-oscillator and free-particle master-equation scenarios: \
             closed-form propagation, observables, and dataset export"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario config and write its datasets.
    Run {
        /// Path to the TOML scenario config.
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also run the finite-difference integrator and fail if it
        /// disagrees with the closed form.
        #[arg(long)]
        check: bool,
        /// Also audit the initial-state factorization of the propagator.
        #[arg(long)]
        audit: bool,
        /// Worker threads (default: all cores; CLGRID_THREADS as fallback).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            check,
            audit,
            threads,
        } => {
            let threads = threads.or_else(|| {
                std::env::var("CLGRID_THREADS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            });
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("clgrid: thread pool: {e}");
                    return ExitCode::from(2);
                }
            }
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("clgrid: {}: {e}", config.display());
                    return ExitCode::from(4);
                }
            };
            let scenario = match Scenario::from_toml_str(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("clgrid: {e}");
                    return ExitCode::from(2);
                }
            };
            match run(&scenario, &out, &RunFlags { check, audit }) {
                Ok(summary) => {
                    if let Some(gap) = summary.check_gap {
                        println!("oracle comparison: max L-infinity gap {gap:e}");
                    }
                    if let Some(d) = summary.audit_discrepancy {
                        println!("factorization audit: max ratio discrepancy {d:e}");
                    }
                    println!("wrote {} files to {}", summary.files.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("clgrid: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
