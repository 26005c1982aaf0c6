//! Monte-Carlo acceptance estimates with score intervals.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::machine::counter::{run_counter_machine, CounterProgram};
use crate::machine::random::SeededBits;
use crate::machine::tape::{run_tape_machine, TapeProgram};
use crate::machine::{EngineError, Input, Limits, RunOutcome, Verdict};

pub const DEFAULT_LEVEL: f64 = 0.99;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictCounts {
    pub accepted: u64,
    pub rejected: u64,
    pub resource_limit: u64,
    /// Trials that ended in an engine error.
    pub errors: u64,
}

impl VerdictCounts {
    fn of(result: &Result<RunOutcome, EngineError>) -> Self {
        let mut c = VerdictCounts::default();
        match result {
            Ok(o) => match o.verdict {
                Verdict::Accepted => c.accepted = 1,
                Verdict::Rejected => c.rejected = 1,
                Verdict::ResourceLimit => c.resource_limit = 1,
            },
            Err(_) => c.errors = 1,
        }
        c
    }

    fn merge(self, o: Self) -> Self {
        VerdictCounts {
            accepted: self.accepted + o.accepted,
            rejected: self.rejected + o.rejected,
            resource_limit: self.resource_limit + o.resource_limit,
            errors: self.errors + o.errors,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateReport {
    pub trials: u64,
    pub successes: u64,
    pub verdict_counts: VerdictCounts,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub master_seed: u64,
}

/// Two-sided Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    assert!(trials > 0 && (0.0..1.0).contains(&level));
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Runs `trial` on substreams `0..trials` of `master_seed`. The worker count
/// only changes the wall time.
pub fn estimate_with<F>(trial: F, trials: u64, master_seed: u64, level: f64, workers: usize) -> EstimateReport
where
    F: Fn(&mut SeededBits) -> Result<RunOutcome, EngineError> + Sync,
{
    assert!(trials >= 1, "at least one trial");
    let one = |t: u64| VerdictCounts::of(&trial(&mut SeededBits::substream(master_seed, t)));
    let counts = if workers <= 1 {
        (0..trials).map(one).fold(VerdictCounts::default(), VerdictCounts::merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(one)
                .reduce(VerdictCounts::default, VerdictCounts::merge)
        })
    };
    let (ci_low, ci_high) = wilson_interval(counts.accepted, trials, level);
    EstimateReport {
        trials,
        successes: counts.accepted,
        verdict_counts: counts,
        point_estimate: counts.accepted as f64 / trials as f64,
        ci_low,
        ci_high,
        level,
        master_seed,
    }
}

/// Acceptance estimate of a tape machine on `input`.
pub fn estimate_acceptance<P>(
    prog: &P,
    input: &Input,
    trials: u64,
    master_seed: u64,
    level: f64,
    workers: usize,
    limits: &Limits,
) -> EstimateReport
where
    P: TapeProgram + Sync,
{
    estimate_with(|rng| run_tape_machine(prog, input, rng, limits), trials, master_seed, level, workers)
}

/// Acceptance estimate of a counter automaton on `a^n`.
pub fn estimate_acceptance_counter<P>(
    prog: &P,
    n: &num_bigint::BigUint,
    trials: u64,
    master_seed: u64,
    level: f64,
    workers: usize,
    limits: &Limits,
) -> EstimateReport
where
    P: CounterProgram + Sync,
{
    estimate_with(|rng| run_counter_machine(prog, n, rng, limits), trials, master_seed, level, workers)
}
