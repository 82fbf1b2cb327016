use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use halfstokes_cli::{cmd_kernel_table, cmd_norms, cmd_solve, cmd_verify, CliError, RunConfig};

/// Unsteady Stokes flow in the half-space driven by boundary velocity.
///
/// Every setting lives in a flat `key = value` file; `HALFSTOKES_<KEY>`
/// environment variables override it, and the flags below override both.
/// Exit codes: 0 pass, 1 verification failure, 2 configuration or usage
/// error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "halfstokes", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Tabulate kernels, their dilations and bound ratios.
    KernelTable,
    /// Evaluate the solution at the configured points.
    Solve,
    /// Run the verification checks.
    Verify,
    /// Norms of the data and weighted functionals of the solution.
    Norms,
    /// Print every config key with its default and unit.
    Keys,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut over = Vec::new();
    if let Some(o) = &cli.out {
        over.push(("out", o.display().to_string()));
    }
    if let Some(t) = cli.threads {
        over.push(("threads", t.to_string()));
    }
    if let Some(s) = cli.seed {
        over.push(("seed", s.to_string()));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &over)?;
    match cli.cmd {
        Cmd::KernelTable => cmd_kernel_table(&cfg),
        Cmd::Solve => cmd_solve(&cfg),
        Cmd::Verify => cmd_verify(&cfg),
        Cmd::Norms => cmd_norms(&cfg),
        Cmd::Keys => {
            for (k, d, what) in halfstokes_cli::config::KEYS {
                println!("{k} = {d}\n    {what}\n    env {}", halfstokes_cli::config::env_name(k));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
