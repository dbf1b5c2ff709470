use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use d2dshare::cli::{load_config, run_experiment, CliError, Experiment, RunOptions};

/// Two-operator D2D spectrum-sharing experiments.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// JSON scenario file.
    #[arg(long)]
    config: PathBuf,
    /// convergence, beta_vs_eps, gain_vs_eps, gain_vs_load, mc_validate or
    /// diagnostics.
    #[arg(long)]
    experiment: Experiment,
    /// CSV file to write.
    #[arg(long)]
    output: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `mc.trials`.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides `solver.ne_tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads; 0 uses every CPU.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.mc.trials = trials;
    }
    if let Some(tol) = args.tol {
        cfg.solver.ne_tol = tol;
    }
    cfg.validate()?;
    run_experiment(
        &cfg,
        args.experiment,
        &args.output,
        RunOptions {
            workers: args.workers,
        },
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
