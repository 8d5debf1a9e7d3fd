//! Command-line front end for the final-state projection experiments.
//!
//! Exit codes: 0 when every summary metric passes its oracle gate, 1 when at
//! least one fails, 2 for invalid configuration, 3 for I/O failures.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use finalstate::experiments::{
    run_experiment, ExperimentConfig, ExperimentKind, FinalStateKind, InteractionKind,
};
use finalstate::output::{write_output, OutputDocument, OutputFormat};

#[derive(Debug, Parser)]
#[command(
    name = "finalstate",
    about = "Monte Carlo experiments on black-hole final-state projection channels"
)]
struct Cli {
    /// Which experiment to run.
    #[arg(long, value_enum)]
    experiment: ExperimentKind,

    /// Hilbert-space dimension N (mutually exclusive with --qubits).
    #[arg(long, conflicts_with = "qubits")]
    dim: Option<usize>,

    /// Qubits per side, N = 2^n; required for circuit modes.
    #[arg(long)]
    qubits: Option<usize>,

    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// Master seed; trial i draws from stream i of this seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Final-state family on matter⊗in.
    #[arg(long, value_enum, default_value_t = FinalStateKind::Haar)]
    final_state: FinalStateKind,

    /// Infalling-matter interaction model.
    #[arg(long, value_enum, default_value_t = InteractionKind::HaarState)]
    interaction: InteractionKind,

    /// Circuit depth in layers (default 4n).
    #[arg(long)]
    depth: Option<usize>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Include per-trial records in the output document.
    #[arg(long, default_value_t = false)]
    per_trial: bool,

    /// Worker threads (identical results regardless of value).
    #[arg(long, env = "FINALSTATE_WORKERS")]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = ExperimentConfig {
        experiment: cli.experiment,
        dim: cli.dim,
        qubits: cli.qubits,
        trials: cli.trials,
        seed: cli.seed,
        final_state: cli.final_state,
        interaction: cli.interaction,
        depth: cli.depth,
        workers: cli.workers,
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let started = Instant::now();
    let (records, summary) = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let timing = started.elapsed().as_secs_f64();

    let all_pass = summary.all_pass;
    let doc = OutputDocument::new(cfg, summary, cli.per_trial.then_some(records), timing);
    if let Err(e) = write_output(&doc, cli.format, cli.out.as_deref()) {
        eprintln!("error: failed to write output: {e}");
        return ExitCode::from(3);
    }

    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
