use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use erlab::config::{ExperimentConfig, ExperimentKind};
use erlab::experiments::{remove_outputs, run_experiment, write_outputs};

const EXIT_VALIDATION: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "erlab", version, about = "Excess-risk laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        /// Exit with status 3 if any check fails.
        #[arg(long)]
        check: bool,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
        config: PathBuf,
    },
    /// List the available experiments.
    List,
}

fn list() {
    for k in ExperimentKind::ALL {
        let bounds = k.bounds();
        if bounds.is_empty() {
            println!("{:<10} {}", k.name(), k.description());
        } else {
            println!("{:<10} {} [bounds: {}]", k.name(), k.description(), bounds.join(", "));
        }
    }
}

fn run(check: bool, threads: Option<usize>, path: PathBuf) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("erlab: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    if let Err(e) = cfg.apply_env() {
        eprintln!("erlab: {e}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("erlab: --threads must be positive");
            return ExitCode::from(EXIT_VALIDATION);
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("erlab: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let outcome = match pool.install(|| run_experiment(&cfg)) {
        Ok(o) => o,
        Err(e) => {
            remove_outputs(&cfg.output_dir);
            eprintln!("erlab: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    if let Err(e) = write_outputs(&cfg, &outcome) {
        eprintln!("erlab: writing outputs to {}: {e}", cfg.output_dir.display());
        return ExitCode::from(EXIT_IO);
    }
    let failed: Vec<_> = outcome.report.checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    println!(
        "{}: {} rows, {} checks, {} failed -> {}",
        cfg.experiment.name(),
        outcome.table.rows.len(),
        outcome.report.checks.len(),
        failed.len(),
        cfg.output_dir.display()
    );
    if check && !failed.is_empty() {
        return ExitCode::from(EXIT_CHECK_FAILED);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run { check, threads, config } => run(check, threads, config),
    }
}
