//! Probability that the head count after `64^k` flips shows `x_k` in bit
//! `3k+3` from the right.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::bigfloat::{BigFloat, PRECISION};
use super::AnalysisError;
use crate::coin::{truncate_p, Coin, CoinError, SetSpec};
use crate::machine::random::BitSource;
use crate::languages::{classify_unary, Membership, UnaryFamily};

/// Largest `k` handled; exact integer arithmetic up to `EXACT_MAX_K`.
pub const MAX_K: u32 = 3;
pub const EXACT_MAX_K: u32 = 2;

/// An exact value `numer / 2^denom_log2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exact {
    pub numer: BigUint,
    pub denom_log2: u64,
}

impl Exact {
    pub fn to_f64(&self) -> f64 {
        let shift = self.numer.bits().saturating_sub(60);
        let top = (&self.numer >> shift).to_f64().unwrap_or(0.0);
        let e = shift as i64 - self.denom_log2 as i64;
        if e < -2000 {
            0.0
        } else {
            top * 2f64.powi(e as i32)
        }
    }

    fn complement(&self) -> Exact {
        Exact {
            numer: (BigUint::one() << self.denom_log2) - &self.numer,
            denom_log2: self.denom_log2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbabilityResult {
    pub value: f64,
    #[serde(skip)]
    pub exact: Option<Exact>,
    /// Mantissa bits of the summation; 0 when exact.
    pub mantissa_bits: u64,
    /// Covers truncating `p_I` and, for floating summation, rounding.
    pub error_bound: f64,
}

impl ProbabilityResult {
    pub fn certain(value: bool) -> Self {
        ProbabilityResult {
            value: if value { 1.0 } else { 0.0 },
            exact: Some(Exact {
                numer: BigUint::from(u32::from(value)),
                denom_log2: 0,
            }),
            mantissa_bits: 0,
            error_bound: 0.0,
        }
    }
}

/// Default truncation for `k`.
pub fn default_truncation(k: u32) -> u32 {
    6 * k + 40
}

/// `2^(6k - M)`: moving `p` by `δ` moves any event of `n` flips by at most `nδ`.
fn truncation_bound(k: u32, m: u32) -> f64 {
    2f64.powi(6 * k as i32 - m as i32)
}

/// Sum of `C(n,h) a^h b^(n-h)` over `h` with bit `bit` set, walking `h` upwards.
///
/// Every step stays integral: `T_h (n-h)/(h+1)` is `C(n,h+1) a^h b^(n-h)` and
/// the final division by `b` removes one of at least one factor `b`.
pub fn bit_sum_ascending(n: u64, a: &BigUint, b: &BigUint, bit: u32) -> BigUint {
    let mut term = b.pow(n as u32);
    let mut sum = BigUint::zero();
    for h in 0..=n {
        if (h >> bit) & 1 == 1 {
            sum += &term;
        }
        if h < n {
            term *= n - h;
            term /= h + 1;
            term *= a;
            term /= b;
        }
    }
    sum
}

fn check(k: u32, m: u32) -> Result<(), AnalysisError> {
    if k == 0 || k > MAX_K {
        return Err(AnalysisError::Infeasible(format!("k = {k} (supported: 1..={MAX_K})")));
    }
    if m < 6 * k + 6 {
        return Err(AnalysisError::Infeasible(format!("truncation {m} below 6k+6")));
    }
    Ok(())
}

/// `P[bit 3k+3 from the right of H is 1]`, `H ~ Bin(64^k, p̂)`, `p̂` the
/// `m`-bit truncation of `p_I`.
pub fn decision_bit_prob(k: u32, set: &SetSpec, m: u32) -> Result<ProbabilityResult, AnalysisError> {
    check(k, m)?;
    decision_bit_prob_at(k, &truncate_p(set, m).numer, m)
}

/// As [`decision_bit_prob`] with `p̂ = a / 2^m` given directly. Only `k` is
/// checked; the error bound still assumes `p̂` truncates some `p_I`.
pub fn decision_bit_prob_at(k: u32, a: &BigUint, m: u32) -> Result<ProbabilityResult, AnalysisError> {
    if k == 0 || k > MAX_K {
        return Err(AnalysisError::Infeasible(format!("k = {k} (supported: 1..={MAX_K})")));
    }
    assert!(a.bits() <= u64::from(m), "p̂ above 1");
    let n = 1u64 << (6 * k);
    let bit = 3 * k + 2;
    let a = a.clone();
    let b = (BigUint::one() << m) - &a;
    if b.is_zero() {
        // p̂ = 1 only at a set containing every prefix; H = n.
        return Ok(ProbabilityResult {
            error_bound: truncation_bound(k, m),
            ..ProbabilityResult::certain((n >> bit) & 1 == 1)
        });
    }
    if k <= EXACT_MAX_K {
        let exact = Exact {
            numer: bit_sum_ascending(n, &a, &b, bit),
            denom_log2: u64::from(m) * n,
        };
        return Ok(ProbabilityResult {
            value: exact.to_f64(),
            exact: Some(exact),
            mantissa_bits: 0,
            error_bound: truncation_bound(k, m),
        });
    }
    let scale = -(m as i64);
    let mut term = BigFloat::new(b.clone(), scale).powi(n);
    let mut sum = BigFloat::zero();
    for h in 0..=n {
        if (h >> bit) & 1 == 1 {
            sum = sum.add(&term);
        }
        if h < n {
            term = term
                .mul_int(&BigUint::from(n - h))
                .div_int(&BigUint::from(h + 1))
                .mul_int(&a)
                .div_int(&b);
        }
    }
    // Each term carries at most 2·log2(n) + 4n roundings, the sum n more, each
    // a relative 2^(1-PRECISION); the doubled count covers compounding.
    let ops = (2 * (2 * 64 + 5 * n)) as f64;
    let rounding = ops * 2f64.powi(1 - PRECISION as i32);
    Ok(ProbabilityResult {
        value: sum.to_f64(),
        exact: None,
        mantissa_bits: PRECISION,
        error_bound: truncation_bound(k, m) + rounding,
    })
}

/// Probability that the extracted bit equals `x_k`.
pub fn bit_extraction_prob(k: u32, set: &SetSpec, m: u32) -> Result<ProbabilityResult, AnalysisError> {
    let one = decision_bit_prob(k, set, m)?;
    Ok(towards(one, set.contains(u64::from(k))))
}

fn towards(one: ProbabilityResult, x: bool) -> ProbabilityResult {
    if x {
        return one;
    }
    ProbabilityResult {
        value: 1.0 - one.value,
        exact: one.exact.as_ref().map(Exact::complement),
        ..one
    }
}

/// One draw of the statistic: bit `3k+3` from the right of the head count of
/// `64^k` flips of the coin for `set`.
pub fn sample_decision_bit<R: BitSource + ?Sized>(k: u32, set: &SetSpec, rng: &mut R) -> Result<bool, CoinError> {
    let coin = Coin::new(set.clone());
    let mut heads = 0u64;
    for _ in 0..1u64 << (6 * k) {
        heads += u64::from(coin.flip(rng)?);
    }
    Ok((heads >> (3 * k + 2)) & 1 == 1)
}

/// Acceptance probability of the unary builder machines on `a^n`.
pub fn acceptance_oracle_unary(
    family: UnaryFamily,
    set: &SetSpec,
    n: &BigUint,
) -> Result<ProbabilityResult, AnalysisError> {
    match classify_unary(n, family, set) {
        Membership::NotInFamily => Ok(ProbabilityResult::certain(false)),
        m => {
            let i = m.index().unwrap_or(0);
            decision_bit_prob(i, set, default_truncation(i))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_coins() {
        // p̂ = 0: H = 0 always.
        let r = bit_sum_ascending(64, &BigUint::zero(), &BigUint::from(64u32), 5);
        assert!(r.is_zero());
        // p̂ = 1/2 at k = 1: bit 6 of Bin(64, 1/2) is set iff h ∈ [32, 63].
        let r = bit_sum_ascending(64, &BigUint::one(), &BigUint::one(), 5);
        let direct: BigUint = (32..64u32)
            .map(|h| {
                let mut c = BigUint::one();
                for j in 0..h {
                    c = c * (64 - j) / (j + 1);
                }
                c
            })
            .sum();
        assert_eq!(r, direct);
    }

    #[test]
    fn infeasible_inputs() {
        assert!(decision_bit_prob(4, &SetSpec::all(), 70).is_err());
        assert!(decision_bit_prob(1, &SetSpec::all(), 11).is_err());
    }

    #[test]
    fn spec_example_value() {
        // I = {1} cut to 6 bits: p̂ = 41/64, x_1 = 1.
        assert_eq!(truncate_p(&SetSpec::finite([1]), 6).numer, BigUint::from(41u32));
        let r = decision_bit_prob_at(1, &BigUint::from(41u32), 6).unwrap();
        assert!(r.value >= 0.75, "{}", r.value);
        assert!(bit_extraction_prob(1, &SetSpec::finite([1]), 6).is_err());
        let out = acceptance_oracle_unary(UnaryFamily::Ulog, &SetSpec::all(), &1000u32.into()).unwrap();
        assert_eq!(out.value, 0.0);
    }
}
