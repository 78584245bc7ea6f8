use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xlmimo_elm::experiments::{
    run, summarize, write_outputs, ExperimentConfig, ExperimentKind, RunOptions,
};

/// Over-the-air extreme learning machine experiments.
#[derive(Parser, Debug)]
#[command(name = "xlmimo-elm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Accuracy versus number of receive antennas (optionally with a digital ELM baseline).
    SweepNr(RunArgs),
    /// Accuracy versus receive SNR, plus a noise-free reference column.
    SweepSnr(RunArgs),
    /// Accuracy versus Ricean factor.
    SweepKappa(RunArgs),
    /// Mini-batch re-training in an AR(1) time-varying channel.
    Online(RunArgs),
    /// One configuration evaluated over all seeds.
    Single(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trials (overrides the config).
    #[arg(long)]
    seeds: Option<usize>,
    /// Result CSV; summary and manifest are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also train the digital ELM baseline.
    #[arg(long)]
    baseline: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Record per-row wall time (output is then no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

fn execute(kind: ExperimentKind, args: RunArgs) -> xlmimo_elm::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = args.seeds {
        cfg.seeds = n;
    }
    if args.baseline {
        cfg.baseline = true;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    let out = args
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("results/{kind}.csv")));

    let rows = run(
        &cfg,
        kind,
        RunOptions {
            timing: args.timing,
        },
    )?;
    write_outputs(&rows, &cfg, kind, &out)?;

    println!("{kind}: {} rows -> {}", rows.len(), out.display());
    if kind != ExperimentKind::Online {
        for s in summarize(&rows)? {
            let point = if s.param == "n_r" {
                format!("n_r={}", s.n_r)
            } else {
                format!("n_r={} {}={}", s.n_r, s.param, s.value)
            };
            println!(
                "  {:<12} {:<24} acc {:.4} ± {:.4}  ||w||^2 {:.4e}",
                s.model, point, s.mean_accuracy, s.std_accuracy, s.mean_receive_power
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (kind, args) = match cli.command {
        Command::SweepNr(a) => (ExperimentKind::SweepNr, a),
        Command::SweepSnr(a) => (ExperimentKind::SweepSnr, a),
        Command::SweepKappa(a) => (ExperimentKind::SweepKappa, a),
        Command::Online(a) => (ExperimentKind::Online, a),
        Command::Single(a) => (ExperimentKind::Single, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
