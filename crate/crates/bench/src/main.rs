use std::path::PathBuf;
use std::time::Instant;

use abbflow_bench::{parse_config, run_experiment, Experiment};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Batch experiments for the abbflow lattice Boltzmann boundary schemes.
#[derive(Parser, Debug)]
#[command(name = "abbflow-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decay modes of the heat equation on a square.
    HeatSquare(RunArgs),
    /// Acoustic eigenmodes of a disc.
    DiscModes(RunArgs),
    /// Pressure-driven channel flow.
    Poiseuille(RunArgs),
    /// Boundary-layer matrices, kernels and expansions of one wall rule.
    Analyze(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV tables and summary.txt.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for eigensolver start vectors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::HeatSquare(a) => (Experiment::HeatSquare, a),
        Command::DiscModes(a) => (Experiment::DiscModes, a),
        Command::Poiseuille(a) => (Experiment::Poiseuille, a),
        Command::Analyze(a) => (Experiment::Analyze, a),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    let parsed = parse_config(&args.config).with_context(|| format!("invalid config {}", args.config.display()))?;
    if parsed.config.experiment() != experiment {
        bail!(
            "{} describes experiment `{}`, not `{experiment}`",
            args.config.display(),
            parsed.config.experiment()
        );
    }
    let start = Instant::now();
    let summary = run_experiment(&parsed, &args.out, args.seed).with_context(|| format!("{experiment} run failed"))?;
    for (k, v) in summary.entries() {
        println!("{k} = {v}");
    }
    eprintln!("wrote {} in {:.1} s", args.out.display(), start.elapsed().as_secs_f64());
    Ok(())
}
