//! Exact and statistical oracles.

pub mod bigfloat;
pub mod estimate;
pub mod fact1;
pub mod primes;

use thiserror::Error;

pub use estimate::{
    estimate_acceptance, estimate_acceptance_counter, estimate_with, wilson_interval, EstimateReport,
    VerdictCounts, DEFAULT_LEVEL,
};
pub use fact1::{
    acceptance_oracle_unary, bit_extraction_prob, sample_decision_bit, decision_bit_prob, decision_bit_prob_at, default_truncation, Exact,
    ProbabilityResult,
};
pub use primes::{
    fingerprint_stats, is_prime_u64, p1, p2, p3_exact, prime_attempt_stats, prime_pi, primes_up_to,
    ratio_to_pnt, AttemptStats, FingerprintStats,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("infeasible: {0}")]
    Infeasible(String),
}
