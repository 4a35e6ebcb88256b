use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use infomotive::harness::{
    self, emit_outputs, load_run_records, summarize, ExperimentConfig, TraceFile,
};
use infomotive::infotheory::{
    discretize, entropy, normalized_entropy, normalized_pi, one_step_pi, pairwise_entropy,
    pairwise_entropy_sum, pairwise_pi, pairwise_pi_sum, SensorPairing,
};

#[derive(Parser)]
#[command(name = "infomotive", version, about = "Episodic RL experiments with information-theoretic intrinsic rewards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a gamma-sweep experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Worker threads for parallel runs (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the number of runs per gamma.
        #[arg(long)]
        runs_override: Option<usize>,
        /// Override the number of batches per run.
        #[arg(long)]
        batches_override: Option<usize>,
    },
    /// Print entropy and predictive-information statistics of a CSV trace.
    Measure {
        trace: PathBuf,
        /// Bins per channel for the single-channel statistics.
        #[arg(long, default_value_t = 30)]
        bins: usize,
        /// Channel pair "K,L" for pairwise statistics; repeatable.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        /// Bins per channel for the pairwise statistics.
        #[arg(long, default_value_t = 10)]
        bins_per_channel: usize,
    },
    /// Recompute summary.csv from the run CSVs in an output directory.
    Summarize {
        dir: PathBuf,
        /// ERF thresholds for batches-to-threshold statistics, e.g. "5,20".
        #[arg(long)]
        thresholds: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            workers,
            output,
            runs_override,
            batches_override,
        } => run(config, workers, output, runs_override, batches_override),
        Command::Measure {
            trace,
            bins,
            pairs,
            bins_per_channel,
        } => {
            measure(trace, bins, &pairs, bins_per_channel)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Summarize { dir, thresholds } => {
            summarize_dir(dir, thresholds)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(
    config_path: PathBuf,
    workers: Option<usize>,
    output: Option<PathBuf>,
    runs_override: Option<usize>,
    batches_override: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let mut config = ExperimentConfig::from_path(&config_path)
        .with_context(|| format!("loading {}", config_path.display()))?;
    if let Some(dir) = output {
        config.output_dir = dir;
    }
    if let Some(runs) = runs_override {
        config.runs = runs;
    }
    if let Some(batches) = batches_override {
        config.batches = batches;
    }
    let resolved = config.resolve()?;
    let workers = workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });

    let (records, summary) = harness::run_experiment(&resolved, workers)?;
    if records.is_empty() {
        println!("{}: no runs requested, nothing to do", resolved.id);
        return Ok(ExitCode::SUCCESS);
    }
    let written = emit_outputs(&resolved, &records, &summary)?;
    let aborted: Vec<&harness::RunRecord> = records.iter().filter(|r| !r.completed()).collect();
    println!(
        "{}: {} runs ({} aborted), {} files in {}",
        resolved.id,
        records.len(),
        aborted.len(),
        written.len(),
        resolved.output_dir.display()
    );
    for record in &aborted {
        eprintln!(
            "  aborted: gamma={} seed={}: {}",
            record.gamma,
            record.seed,
            record.abort.as_deref().unwrap_or("unknown")
        );
    }
    if aborted.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn measure(
    path: PathBuf,
    bins: usize,
    pair_args: &[String],
    bins_per_channel: usize,
) -> anyhow::Result<()> {
    let file = TraceFile::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let trace = &file.trace;
    println!(
        "trace: {} channels x {} steps, {} bins per channel",
        trace.channels(),
        trace.len(),
        bins
    );
    println!(
        "{:<16} {:>12} {:>12} {:>12} {:>12}",
        "channel", "H (bits)", "H (norm)", "PI (bits)", "PI (norm)"
    );
    for (index, name) in file.names.iter().enumerate() {
        let seq = discretize(trace, index, bins)?;
        println!(
            "{:<16} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            name,
            entropy(&seq)?,
            normalized_entropy(&seq)?,
            one_step_pi(&seq)?,
            normalized_pi(&seq)?
        );
    }

    if !pair_args.is_empty() {
        let mut pairs = Vec::new();
        for arg in pair_args {
            let (k, l) = arg
                .split_once(',')
                .with_context(|| format!("pair '{arg}' must be 'K,L'"))?;
            let k: usize = k.trim().parse().with_context(|| format!("bad index '{k}'"))?;
            let l: usize = l.trim().parse().with_context(|| format!("bad index '{l}'"))?;
            pairs.push((k, l));
        }
        let pairing = SensorPairing::new(pairs, trace.channels())?;
        println!();
        println!(
            "pairing over {} pairs, {} bins per channel:",
            pairing.len(),
            bins_per_channel
        );
        println!(
            "  entropy: mean normalized {:.6}, raw sum {:.6} bits",
            pairwise_entropy(trace, &pairing, bins_per_channel)?,
            pairwise_entropy_sum(trace, &pairing, bins_per_channel)?
        );
        println!(
            "  PI:      mean normalized {:.6}, raw sum {:.6} bits",
            pairwise_pi(trace, &pairing, bins_per_channel)?,
            pairwise_pi_sum(trace, &pairing, bins_per_channel)?
        );
    }
    Ok(())
}

fn summarize_dir(dir: PathBuf, thresholds: Option<String>) -> anyhow::Result<()> {
    let thresholds: Vec<f64> = match thresholds {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad threshold '{t}'"))
            })
            .collect::<anyhow::Result<_>>()?,
        None => Vec::new(),
    };
    let records = load_run_records(&dir)?;
    let summary = summarize(&records, &thresholds)?;
    let summary_path = dir.join("summary.csv");
    std::fs::write(&summary_path, harness::summary_csv(&summary))?;
    println!(
        "{}: {} runs aggregated into {}",
        dir.display(),
        records.len(),
        summary_path.display()
    );
    for threshold in &thresholds {
        let mut gammas: Vec<f64> = records.iter().map(|r| r.gamma).collect();
        gammas.dedup();
        for gamma in gammas {
            match summary.median_batches_to_threshold(gamma, *threshold) {
                Some(median) => println!(
                    "  gamma={gamma}: median batches to ERF>={threshold}: {median}"
                ),
                None => println!(
                    "  gamma={gamma}: median run never reached ERF>={threshold}"
                ),
            }
        }
    }
    Ok(())
}
