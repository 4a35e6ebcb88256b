//! Declarative experiment runner: gamma sweeps across seeded, parallel,
//! reproducible optimization runs.
//!
//! Each (gamma, seed) combination is an independent run with its own
//! random streams, derived by hashing the experiment id, the gamma index
//! and the seed. Runs execute in a bounded worker pool; results are keyed
//! by (gamma, seed) so every output byte is independent of worker count
//! and scheduling.

pub mod config;
pub mod measure;
mod output;
mod plot;

use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::envs::{run_cartpole_episode, run_crawler_episode, CrawlerTask};
use crate::error::{Error, Result};
use crate::pgpe::run_optimization_streamed;
use crate::policy::NeuralPolicy;
use crate::reward::{combine, episode_irf, IrfMeasure};

pub use config::{EnvKind, ExperimentConfig, ResolvedConfig};
pub use measure::{format_trace_csv, TraceFile};
pub use output::{emit_outputs, load_run_records, run_csv, run_file_name, summary_csv};

use crate::infotheory::sample_pairings;

/// One aggregated optimizer batch of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub batch: usize,
    /// Mean extrinsic episode total over the batch's evaluations.
    pub erf_mean: f64,
    /// Mean intrinsic value over the batch's evaluations.
    pub irf: f64,
    /// Mean combined reward over the batch's evaluations.
    pub combined: f64,
    pub baseline: f64,
    pub max_reward: f64,
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub gamma_index: usize,
    pub gamma: f64,
    pub seed: u64,
    pub rows: Vec<BatchRow>,
    pub final_mu: Vec<f64>,
    /// Failure diagnostic when the run aborted mid-way.
    pub abort: Option<String>,
}

impl RunRecord {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }
}

/// Mean and standard deviation of ERF and IRF across runs at one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBatchStats {
    pub gamma: f64,
    pub batch: usize,
    pub erf_mean: f64,
    pub erf_std: f64,
    pub irf_mean: f64,
    pub irf_std: f64,
}

/// First batch index at which a run's mean ERF reached a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCrossing {
    pub threshold: f64,
    pub gamma: f64,
    pub seed: u64,
    pub batches_to_threshold: Option<usize>,
}

/// Cross-run aggregates of one experiment.
#[derive(Debug, Clone, Default)]
pub struct SweepSummary {
    pub rows: Vec<GammaBatchStats>,
    pub crossings: Vec<ThresholdCrossing>,
}

impl SweepSummary {
    /// Median batches-to-threshold over all completed runs of one gamma,
    /// with runs that never crossed sorting last; `None` when the median
    /// run never crossed.
    pub fn median_batches_to_threshold(&self, gamma: f64, threshold: f64) -> Option<f64> {
        let mut values: Vec<Option<usize>> = self
            .crossings
            .iter()
            .filter(|c| c.gamma == gamma && c.threshold == threshold)
            .map(|c| c.batches_to_threshold)
            .collect();
        if values.is_empty() {
            return None;
        }
        values.sort_by_key(|v| v.unwrap_or(usize::MAX));
        let n = values.len();
        if n % 2 == 1 {
            values[n / 2].map(|v| v as f64)
        } else {
            match (values[n / 2 - 1], values[n / 2]) {
                (Some(a), Some(b)) => Some((a + b) as f64 / 2.0),
                _ => None,
            }
        }
    }
}

/// Derives the 32-byte random seed of one run from the experiment id, the
/// gamma index and the seed entry.
fn run_seed_hash(id: &str, gamma_index: usize, seed: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(id.as_bytes());
    hasher.update([0xff]);
    hasher.update((gamma_index as u64).to_le_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.finalize().into()
}

// Independent ChaCha streams of one run.
const STREAM_OPTIMIZER: u64 = 0;
const STREAM_ENVIRONMENT: u64 = 1;
const STREAM_PAIRING: u64 = 2;

fn stream_rng(hash: [u8; 32], stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(hash);
    rng.set_stream(stream);
    rng
}

/// Executes one (gamma, seed) run to completion or abort.
pub fn execute_run(config: &ResolvedConfig, gamma_index: usize, seed: u64) -> RunRecord {
    let gamma = config.gammas[gamma_index];
    let mut record = RunRecord {
        gamma_index,
        gamma,
        seed,
        rows: Vec::with_capacity(config.batches),
        final_mu: Vec::new(),
        abort: None,
    };
    match execute_run_inner(config, gamma_index, seed, &mut record) {
        Ok(final_mu) => record.final_mu = final_mu,
        Err(e) => record.abort = Some(e.to_string()),
    }
    record
}

fn execute_run_inner(
    config: &ResolvedConfig,
    gamma_index: usize,
    seed: u64,
    record: &mut RunRecord,
) -> Result<Vec<f64>> {
    let gamma = config.gammas[gamma_index];
    let beta = config.beta(gamma)?;
    let hash = run_seed_hash(&config.id, gamma_index, seed);
    let mut rng_opt = stream_rng(hash, STREAM_OPTIMIZER);
    let rng_env = RefCell::new(stream_rng(hash, STREAM_ENVIRONMENT));
    let rng_pairing = RefCell::new(stream_rng(hash, STREAM_PAIRING));

    let topology = config.build_topology()?;
    let dim = topology.slot_count();
    let policy = RefCell::new(NeuralPolicy::new(topology));
    // (erf_total, irf_value, combined) per evaluated episode, in order.
    let episodes: RefCell<Vec<(f64, f64, f64)>> = RefCell::new(Vec::new());

    let objective = |theta: &[f64]| -> Result<f64> {
        let mut policy = policy.borrow_mut();
        policy.bind_parameters(theta)?;
        let (episode, measure) = match config.environment {
            EnvKind::Cartpole => {
                let cp = config.cartpole.as_ref().expect("resolved cart-pole config");
                let episode = run_cartpole_episode(&mut policy, cp, config.episode_steps)?;
                let measure = IrfMeasure::SingleChannel {
                    channel: config.irf_config.channel,
                    bins: config.irf_config.bins,
                };
                (episode, measure)
            }
            EnvKind::Locomotion | EnvKind::Rescue => {
                let settings = config.crawler.as_ref().expect("resolved crawler config");
                let task = match config.environment {
                    EnvKind::Locomotion => CrawlerTask::Locomotion,
                    _ => CrawlerTask::Rescue {
                        trap_radius: settings.trap_radius,
                        wall_height: settings.wall_height,
                    },
                };
                let episode = run_crawler_episode(
                    &mut policy,
                    &settings.config,
                    task,
                    config.episode_steps,
                    &mut *rng_env.borrow_mut(),
                )?;
                // Pairings are resampled per episode over the 12 angle channels.
                let pairing = sample_pairings(
                    crate::envs::crawler::JOINTS,
                    config.irf_config.pairs,
                    &mut *rng_pairing.borrow_mut(),
                )?;
                let measure = IrfMeasure::Pairwise {
                    pairing,
                    bins_per_channel: config.irf_config.bins_per_channel,
                };
                (episode, measure)
            }
        };
        let irf = episode_irf(&episode.trace, config.irf, &measure)?;
        let breakdown = combine(episode.erf_total, irf, beta)?;
        episodes
            .borrow_mut()
            .push((breakdown.erf_total, breakdown.irf_value, breakdown.combined));
        Ok(breakdown.combined)
    };

    let evals_per_batch = config.pgpe.rollouts_per_batch * 2;
    let rows = RefCell::new(Vec::with_capacity(config.batches));
    let distribution = run_optimization_streamed(
        objective,
        dim,
        &config.pgpe,
        config.batches,
        &mut rng_opt,
        |batch_record| {
            let episodes = episodes.borrow();
            let start = batch_record.batch * evals_per_batch;
            let slice = &episodes[start..start + evals_per_batch];
            let mean = |f: fn(&(f64, f64, f64)) -> f64| {
                slice.iter().map(f).sum::<f64>() / slice.len() as f64
            };
            rows.borrow_mut().push(BatchRow {
                batch: batch_record.batch,
                erf_mean: mean(|e| e.0),
                irf: mean(|e| e.1),
                combined: mean(|e| e.2),
                baseline: batch_record.baseline,
                max_reward: batch_record.max_reward,
            });
        },
    );
    record.rows = rows.into_inner();
    Ok(distribution?.mu)
}

/// Runs a resolved experiment across its full gamma x seed grid on a
/// bounded worker pool and aggregates the results.
///
/// Individual aborted runs are reported in their [`RunRecord`] and
/// excluded from the summary; the remaining runs are unaffected.
pub fn run_experiment(
    config: &ResolvedConfig,
    workers: usize,
) -> Result<(Vec<RunRecord>, SweepSummary)> {
    if config.runs == 0 {
        return Ok((Vec::new(), SweepSummary::default()));
    }
    let mut tasks = Vec::with_capacity(config.gammas.len() * config.seeds.len());
    for gamma_index in 0..config.gammas.len() {
        for &seed in &config.seeds {
            tasks.push((gamma_index, seed));
        }
    }
    let records: Vec<RunRecord> = if workers == 1 {
        tasks
            .iter()
            .map(|&(g, s)| execute_run(config, g, s))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(|| {
            tasks
                .par_iter()
                .map(|&(g, s)| execute_run(config, g, s))
                .collect()
        })
    };
    let summary = summarize(&records, &config.thresholds)?;
    Ok((records, summary))
}

/// Aggregates run records: per-(gamma, batch) mean and standard deviation
/// of ERF and IRF across runs, plus batches-to-threshold statistics.
///
/// The standard deviation is the population form (a single run reports
/// zero spread). Aborted runs are skipped.
pub fn summarize(records: &[RunRecord], thresholds: &[f64]) -> Result<SweepSummary> {
    let completed: Vec<&RunRecord> = records.iter().filter(|r| r.completed()).collect();
    let mut summary = SweepSummary::default();
    if completed.is_empty() {
        return Ok(summary);
    }
    let batches = completed[0].rows.len();
    if completed.iter().any(|r| r.rows.len() != batches) {
        return Err(Error::InconsistentRecords(
            "runs disagree on batch count".into(),
        ));
    }

    let mut gammas: Vec<(usize, f64)> = completed
        .iter()
        .map(|r| (r.gamma_index, r.gamma))
        .collect();
    gammas.sort_by_key(|&(index, _)| index);
    gammas.dedup();

    for &(gamma_index, gamma) in &gammas {
        let group: Vec<&&RunRecord> = completed
            .iter()
            .filter(|r| r.gamma_index == gamma_index)
            .collect();
        let n = group.len() as f64;
        for batch in 0..batches {
            let stat = |f: fn(&BatchRow) -> f64| {
                let mean = group.iter().map(|r| f(&r.rows[batch])).sum::<f64>() / n;
                let var = group
                    .iter()
                    .map(|r| {
                        let d = f(&r.rows[batch]) - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / n;
                (mean, var.sqrt())
            };
            let (erf_mean, erf_std) = stat(|r| r.erf_mean);
            let (irf_mean, irf_std) = stat(|r| r.irf);
            summary.rows.push(GammaBatchStats {
                gamma,
                batch,
                erf_mean,
                erf_std,
                irf_mean,
                irf_std,
            });
        }
        for &threshold in thresholds {
            for record in &group {
                let crossed = record
                    .rows
                    .iter()
                    .position(|row| row.erf_mean >= threshold);
                summary.crossings.push(ThresholdCrossing {
                    threshold,
                    gamma,
                    seed: record.seed,
                    batches_to_threshold: crossed,
                });
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(batch: usize, erf: f64) -> BatchRow {
        BatchRow {
            batch,
            erf_mean: erf,
            irf: erf / 10.0,
            combined: erf,
            baseline: 0.0,
            max_reward: erf,
        }
    }

    fn record(gamma: f64, seed: u64, erfs: &[f64]) -> RunRecord {
        RunRecord {
            gamma_index: 0,
            gamma,
            seed,
            rows: erfs.iter().enumerate().map(|(b, &e)| row(b, e)).collect(),
            final_mu: vec![],
            abort: None,
        }
    }

    #[test]
    fn single_run_has_zero_std() {
        let records = vec![record(0.0, 1, &[1.0, 2.0, 3.0])];
        let summary = summarize(&records, &[]).unwrap();
        assert_eq!(summary.rows.len(), 3);
        for row in &summary.rows {
            assert_eq!(row.erf_std, 0.0);
            assert_eq!(row.irf_std, 0.0);
        }
    }

    #[test]
    fn opposite_curves_average_to_zero() {
        let records = vec![
            record(0.0, 1, &[2.0, -4.0, 8.0]),
            record(0.0, 2, &[-2.0, 4.0, -8.0]),
        ];
        let summary = summarize(&records, &[]).unwrap();
        for row in &summary.rows {
            assert_eq!(row.erf_mean, 0.0);
        }
    }

    #[test]
    fn threshold_crossing_reports_first_batch() {
        let records = vec![record(0.0, 1, &[0.0, 1.0, 4.9, 5.0, 7.0, 2.0])];
        let summary = summarize(&records, &[5.0]).unwrap();
        assert_eq!(summary.crossings.len(), 1);
        assert_eq!(summary.crossings[0].batches_to_threshold, Some(3));
        let records = vec![record(0.0, 1, &[0.0, 1.0])];
        let summary = summarize(&records, &[5.0]).unwrap();
        assert_eq!(summary.crossings[0].batches_to_threshold, None);
    }

    #[test]
    fn median_counts_unreached_runs_as_infinite() {
        let records = vec![
            record(0.0, 1, &[6.0]),
            record(0.0, 2, &[0.0]),
            record(0.0, 3, &[6.0]),
        ];
        let summary = summarize(&records, &[5.0]).unwrap();
        assert_eq!(summary.median_batches_to_threshold(0.0, 5.0), Some(0.0));
        let records = vec![record(0.0, 1, &[6.0]), record(0.0, 2, &[0.0])];
        let summary = summarize(&records, &[5.0]).unwrap();
        assert_eq!(summary.median_batches_to_threshold(0.0, 5.0), None);
    }

    #[test]
    fn inconsistent_lengths_are_rejected() {
        let records = vec![record(0.0, 1, &[1.0, 2.0]), record(0.0, 2, &[1.0])];
        assert!(summarize(&records, &[]).is_err());
    }

    #[test]
    fn aborted_runs_are_excluded() {
        let mut bad = record(0.0, 2, &[1.0]);
        bad.abort = Some("boom".into());
        let records = vec![record(0.0, 1, &[3.0, 4.0]), bad];
        let summary = summarize(&records, &[]).unwrap();
        assert_eq!(summary.rows.len(), 2);
        assert_eq!(summary.rows[0].erf_mean, 3.0);
    }

    #[test]
    fn seed_hash_distinguishes_all_inputs() {
        let base = run_seed_hash("exp", 0, 1);
        assert_ne!(base, run_seed_hash("exp", 0, 2));
        assert_ne!(base, run_seed_hash("exp", 1, 1));
        assert_ne!(base, run_seed_hash("exp2", 0, 1));
        assert_eq!(base, run_seed_hash("exp", 0, 1));
    }
}
