//! The binary successor chains `bin(1) 2 bin(2) 2 ... 2 bin(s) 4`.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shape parameters of the chain language and of the machines that read it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoglogConfig {
    /// Admissible last blocks have `|bin(s)| = 2^(length_step·k)`, `k ≥ 1`.
    pub length_step: u32,
    /// `2^(toss_step·k)` coins are tossed after the `4`.
    pub toss_step: u32,
    /// Heads are counted modulo `2^(modulus_base + modulus_step·k)`.
    pub modulus_base: u32,
    pub modulus_step: u32,
    /// Candidate primes have `|m|·c` bits.
    pub c: u32,
    /// Pairs whose first block is shorter than this are compared digit by digit.
    pub min_random_check_m: u64,
    /// Largest chain the generator will write, in bytes.
    pub byte_budget: u64,
}

impl LoglogConfig {
    /// The geometry of the original construction: `|bin(s)| = 64^k`.
    pub fn paper() -> Self {
        LoglogConfig {
            length_step: 6,
            toss_step: 6,
            modulus_base: 3,
            modulus_step: 3,
            c: 2,
            min_random_check_m: 64,
            byte_budget: 1 << 30,
        }
    }

    /// Desk-scale geometry: `|bin(s)| = 4^k`, with the same toss count and
    /// decision bit as the paper geometry, so the bit-extraction numbers carry over.
    pub fn scaled() -> Self {
        LoglogConfig {
            length_step: 2,
            c: 3,
            min_random_check_m: 3,
            ..LoglogConfig::paper()
        }
    }

    pub fn with_c(mut self, c: u32) -> Self {
        self.c = c;
        self
    }

    pub fn with_length_step(mut self, g: u32) -> Self {
        self.length_step = g;
        self
    }

    pub fn with_min_random_check_m(mut self, m: u64) -> Self {
        self.min_random_check_m = m;
        self
    }

    /// `|bin(s)|` of the `k`-th admissible length.
    pub fn length_for(&self, k: u32) -> BigUint {
        BigUint::one() << (self.length_step * k)
    }

    pub fn toss_count(&self, k: u32) -> BigUint {
        BigUint::one() << (self.toss_step * k)
    }

    /// `log2` of the head-count modulus; also the 1-based position (from the
    /// right) of the decision bit.
    pub fn modulus_bits(&self, k: u32) -> u32 {
        self.modulus_base + self.modulus_step * k
    }

    /// The `k` with `m = 2^(length_step·k)`, if any.
    pub fn k_for_length(&self, m: u64) -> Option<u32> {
        if m < 2 || !m.is_power_of_two() {
            return None;
        }
        let e = m.trailing_zeros();
        e.is_multiple_of(self.length_step).then_some(e / self.length_step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FailureReason {
    /// The first block is not `1`.
    BadStart,
    /// A block is not the binary successor of the one before it.
    BadSuccessor,
    /// A symbol that cannot appear where it does.
    BadDigit,
    /// The input ends before a `4`.
    MissingTerminal,
    /// `|bin(s)|` is not an admissible length.
    LengthPredicate,
}

/// Why and where a word fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: FailureReason,
    /// Index into `w` of the symbol at which the failure is certain.
    pub position: usize,
}

#[derive(Debug, Error)]
pub enum LoglogError {
    #[error("chain needs {needed} bytes, over the budget of {budget}")]
    Capacity { needed: BigUint, budget: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Binary successor of a binary string without leading zeros.
pub fn successor(bits: &[u8]) -> Vec<u8> {
    let mut out = bits.to_vec();
    for i in (0..out.len()).rev() {
        if out[i] == b'1' {
            out[i] = b'0';
        } else {
            out[i] = b'1';
            return out;
        }
    }
    out.insert(0, b'1');
    out
}

/// Is `next` the binary successor of `prev`?
pub fn successor_ok(prev: &[u8], next: &[u8]) -> bool {
    successor(prev) == next
}

/// Validates `w`, returning the `k` of its last block.
///
/// A block fails at the first digit that cannot continue the successor of
/// the block before it (`1` for the first block), or at its terminator if
/// it is too short.
pub fn loglog_validate(w: &[u8], config: &LoglogConfig) -> Result<u32, Rejection> {
    let mut expected = b"1".to_vec();
    let mut first = true;
    let mut cur: Vec<u8> = Vec::new();
    for (pos, &c) in w.iter().enumerate() {
        let fail = |reason| Err(Rejection { reason, position: pos });
        let successor_failure = if first {
            FailureReason::BadStart
        } else {
            FailureReason::BadSuccessor
        };
        match c {
            b'0' | b'1' => {
                if cur.is_empty() && c == b'0' {
                    return fail(FailureReason::BadDigit);
                }
                if expected.get(cur.len()) != Some(&c) {
                    return fail(successor_failure);
                }
                cur.push(c);
            }
            b'2' | b'4' => {
                if cur.is_empty() {
                    return fail(FailureReason::BadDigit);
                }
                if cur.len() != expected.len() {
                    return fail(successor_failure);
                }
                if c == b'4' {
                    let Some(k) = config.k_for_length(cur.len() as u64) else {
                        return fail(FailureReason::LengthPredicate);
                    };
                    if pos + 1 != w.len() {
                        return Err(Rejection {
                            reason: FailureReason::BadDigit,
                            position: pos + 1,
                        });
                    }
                    return Ok(k);
                }
                expected = successor(&cur);
                cur.clear();
                first = false;
            }
            _ => return fail(FailureReason::BadDigit),
        }
    }
    Err(Rejection {
        reason: FailureReason::MissingTerminal,
        position: w.len(),
    })
}

/// Length in bytes of the chain ending at `bin(s)`, terminator included.
pub fn chain_length(s: &BigUint) -> BigUint {
    let mut total = BigUint::zero();
    let top = s.bits();
    for b in 1..=top {
        let lo = BigUint::one() << (b - 1);
        let hi = ((BigUint::one() << b) - 1u32).min(s.clone());
        total += (hi - &lo + 1u32) * b;
    }
    total + s
}

/// Streams the chain ending at `bin(s)` into `sink`; returns the bytes written.
pub fn loglog_generate<W: Write>(
    s: &BigUint,
    config: &LoglogConfig,
    sink: &mut W,
) -> Result<u64, LoglogError> {
    assert!(!s.is_zero(), "chains start at bin(1)");
    let needed = chain_length(s);
    match needed.to_u64() {
        Some(n) if n <= config.byte_budget => {}
        _ => {
            return Err(LoglogError::Capacity {
                needed,
                budget: config.byte_budget,
            })
        }
    }
    let mut block = vec![b'1'];
    let mut i = BigUint::one();
    loop {
        sink.write_all(&block)?;
        if &i == s {
            sink.write_all(b"4")?;
            break;
        }
        sink.write_all(b"2")?;
        block = successor(&block);
        i += 1u32;
    }
    Ok(needed.to_u64().unwrap_or(u64::MAX))
}

/// The chain ending at `bin(s)` as a byte string.
pub fn loglog_word(s: u64, config: &LoglogConfig) -> Result<Vec<u8>, LoglogError> {
    let mut out = Vec::new();
    loglog_generate(&BigUint::from(s), config, &mut out)?;
    Ok(out)
}

/// The shortest member with parameter `k`: the chain ending at `2^(|bin(s)|-1)`.
pub fn loglog_member(k: u32, config: &LoglogConfig) -> Result<Vec<u8>, LoglogError> {
    let m = config.length_for(k);
    let exp = (m - 1u32).to_u64().ok_or_else(|| LoglogError::Capacity {
        needed: BigUint::one() << 64u32,
        budget: config.byte_budget,
    })?;
    let s = BigUint::one() << exp;
    let mut out = Vec::new();
    loglog_generate(&s, config, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow2_config() -> LoglogConfig {
        LoglogConfig::scaled().with_length_step(1)
    }

    #[test]
    fn generator_examples() {
        let cfg = LoglogConfig::scaled();
        assert_eq!(loglog_word(3, &cfg).unwrap(), b"12102114");
        assert_eq!(loglog_word(4, &cfg).unwrap(), b"121021121004");
        for s in 1..200u64 {
            let w = loglog_word(s, &cfg).unwrap();
            assert_eq!(chain_length(&BigUint::from(s)), BigUint::from(w.len()));
        }
    }

    #[test]
    fn paper_default_is_out_of_reach() {
        let err = loglog_member(1, &LoglogConfig::paper()).unwrap_err();
        assert!(matches!(err, LoglogError::Capacity { .. }));
    }

    #[test]
    fn validator_examples() {
        let cfg = pow2_config();
        assert_eq!(loglog_validate(b"12102114", &cfg), Ok(1));
        assert_eq!(
            loglog_validate(b"12102124", &cfg).unwrap_err().reason,
            FailureReason::BadSuccessor
        );
        assert_eq!(
            loglog_validate(b"1210211", &cfg).unwrap_err().reason,
            FailureReason::MissingTerminal
        );
        assert_eq!(loglog_validate(b"04", &cfg).unwrap_err().reason, FailureReason::BadDigit);
        assert_eq!(loglog_validate(b"104", &cfg).unwrap_err().reason, FailureReason::BadStart);
        assert_eq!(loglog_validate(b"1224", &cfg).unwrap_err().reason, FailureReason::BadDigit);
        assert_eq!(loglog_validate(b"14", &cfg).unwrap_err().reason, FailureReason::LengthPredicate);
        assert_eq!(loglog_validate(b"12104$", &cfg).unwrap_err().reason, FailureReason::BadDigit);
    }

    #[test]
    fn round_trip() {
        let cfg = LoglogConfig::scaled();
        for s in 1..600u64 {
            let w = loglog_word(s, &cfg).unwrap();
            let len = 64 - s.leading_zeros() as u64;
            match loglog_validate(&w, &cfg) {
                Ok(k) => assert_eq!(cfg.length_for(k), BigUint::from(len)),
                Err(r) => {
                    assert_eq!(r.reason, FailureReason::LengthPredicate);
                    assert!(cfg.k_for_length(len).is_none());
                }
            }
        }
    }

    #[test]
    fn member_shape() {
        let cfg = LoglogConfig::scaled();
        let w = loglog_member(1, &cfg).unwrap();
        assert_eq!(loglog_validate(&w, &cfg), Ok(1));
        assert!(w.ends_with(b"210004"));
        assert_eq!(cfg.k_for_length(16), Some(2));
        assert_eq!(cfg.k_for_length(8), None);
        assert_eq!(LoglogConfig::paper().k_for_length(64), Some(1));
        assert_eq!(LoglogConfig::paper().modulus_bits(1), 6);
    }
}
