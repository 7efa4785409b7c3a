//! Seeded trial batches, summary statistics, curve fits and report files.
//!
//! Every trial gets its own RNG streams derived from `base_seed + trial`,
//! so results do not depend on scheduling. With the `parallel` feature the
//! trials of a batch run on a rayon pool; without it, or with one worker,
//! they run in order on the calling thread.

mod report;
mod stats;

use std::path::PathBuf;

use rand::SeedableRng;

pub use report::{
    emit_report, fmt_sig, read_runs_csv, write_runs_csv, write_summary_csv, Report, TheoryPoint, REPORT_FILE,
    RUNS_FILE, RUNS_HEADER, SUMMARY_FILE, SUMMARY_HEADER,
};
pub use stats::{fit_curve, summarize, theory_model_for, Fit, FitModel, MomentStats, SummaryRow};

use crate::algorithms::{default_budget, run_algorithm, Algorithm, RunRecord, RunRng};
use crate::error::{Error, Result};
use crate::problems::{random_instance, HiddenInstance, Oracle, ProblemClass};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub class: ProblemClass,
    pub n_values: Vec<usize>,
    pub trials: u64,
    pub base_seed: u64,
    /// Per-run query budget; `None` means [`default_budget`].
    pub budget: Option<u64>,
    /// Worker threads; 0 lets rayon decide, 1 runs sequentially.
    pub workers: usize,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, class: ProblemClass, n_values: Vec<usize>, trials: u64, base_seed: u64) -> Self {
        Self { algorithm, class, n_values, trials, base_seed, budget: None, workers: 0, output_path: None }
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("at least one n is required".into()));
        }
        if self.budget == Some(0) {
            return Err(Error::Config("budget must be positive".into()));
        }
        for &n in &self.n_values {
            self.algorithm.validate(self.class, n)?;
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Instance seed and algorithm RNG for the trial with public seed `seed`
/// at size `n`.
pub fn trial_streams(seed: u64, n: usize) -> (u64, RunRng) {
    let root = splitmix64(seed ^ splitmix64(n as u64));
    let instance_seed = splitmix64(root);
    let mut rng = RunRng::seed_from_u64(splitmix64(root.wrapping_add(1)));
    rng.set_stream(1);
    (instance_seed, rng)
}

/// Regenerates the hidden instance of a run from its public descriptor.
pub fn regenerate_instance(class: ProblemClass, n: usize, seed: u64) -> Result<HiddenInstance> {
    random_instance(class, n, trial_streams(seed, n).0)
}

/// Runs one trial; `seed` is the public trial seed.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<RunRecord> {
    let (instance_seed, rng) = trial_streams(seed, n);
    let instance = random_instance(cfg.class, n, instance_seed)?;
    let budget = cfg.budget.unwrap_or_else(|| default_budget(n));
    let outcome = run_algorithm(cfg.algorithm, Oracle::new(instance, Some(budget)), rng)?;
    Ok(RunRecord {
        run_id: 0,
        algorithm: cfg.algorithm.name().to_string(),
        class: cfg.class,
        n,
        k: cfg.algorithm.arity_label(),
        seed,
        queries: outcome.queries,
        success: outcome.success,
        hit_budget: outcome.hit_budget,
    })
}

/// Runs `trials` fresh-instance trials for every `n`, sorted by `(n, trial)`
/// with `run_id` set to the row position.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut jobs: Vec<(usize, u64)> = cfg.n_values.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    jobs.sort_unstable();
    jobs.dedup();
    let run = |&(n, t): &(usize, u64)| run_trial(cfg, n, cfg.base_seed.wrapping_add(t));
    let mut records = execute(cfg.workers, &jobs, run)?;
    for (i, r) in records.iter_mut().enumerate() {
        r.run_id = i as u64;
    }
    Ok(records)
}

#[cfg(feature = "parallel")]
fn execute<J, T, F>(workers: usize, jobs: &[J], f: F) -> Result<Vec<T>>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 1 {
        return jobs.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<J, T, F>(_workers: usize, jobs: &[J], f: F) -> Result<Vec<T>>
where
    F: Fn(&J) -> Result<T>,
{
    jobs.iter().map(f).collect()
}
