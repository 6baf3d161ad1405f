use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ringberry_cli::{execute, RunOptions, Subcommand};

/// Berry phase of atoms in a time-orbiting ring trap.
#[derive(Debug, Parser)]
#[command(name = "ringberry", version)]
struct Args {
    subcommand: Subcommand,
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[analysis] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, env = "RINGBERRY_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if args.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    if let Err(e) = pool.build_global() {
        log::warn!("thread pool already initialized: {e}");
    }
    let opts = RunOptions {
        subcommand: args.subcommand,
        config: args.config,
        out: args.out,
        seed: args.seed,
        threads: rayon::current_num_threads(),
    };
    match execute(&opts) {
        Ok(summary) => {
            println!("{}", summary.directory.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
