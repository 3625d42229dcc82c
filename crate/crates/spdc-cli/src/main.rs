//! Experiment runner: `spdc run|sweep|oracle|oracle-compare <config>`.

mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::OutputDir;


#[derive(Parser)]
#[command(name = "spdc", version, about = "Parametric down-conversion simulator for lossy dispersive 1D waveguides")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: SPDC_THREADS env var, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the run.output_dir of the config.
    #[arg(long, global = true)]
    output_dir: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured system and persist its observables.
    Run { config: PathBuf },
    /// Run once per pump energy in sweep.energies and fit the sinh² gain law.
    Sweep { config: PathBuf },
    /// Evaluate the low-gain perturbative spectrum on the configured grids.
    Oracle { config: PathBuf },
    /// Solve and compare against the low-gain oracle, shape-fitted.
    OracleCompare { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("SPDC_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let path = match &cli.command {
        Command::Run { config }
        | Command::Sweep { config }
        | Command::Oracle { config }
        | Command::OracleCompare { config } => config.clone(),
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    let out = match OutputDir::create(&cfg.output_dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("cannot create output dir: {e}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Run { .. } => runner::run(&cfg, &out),
        Command::Sweep { .. } => runner::sweep(&cfg, &out),
        Command::Oracle { .. } => runner::oracle(&cfg, &out),
        Command::OracleCompare { .. } => runner::oracle_compare(&cfg, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
