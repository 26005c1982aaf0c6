//! Prime counting, fingerprint collision counts and prime drawing.

use serde::Serialize;

use super::estimate::wilson_interval;
use super::AnalysisError;
use crate::machine::random::BitSource;

/// Largest `n` for the exhaustive collision maximum.
pub const P3_MAX_N: u32 = 8;

/// Primes up to and including `limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

pub fn prime_pi(x: u64) -> u64 {
    primes_up_to(x).len() as u64
}

/// `π(x) / (x / ln x)`.
pub fn ratio_to_pnt(x: u64) -> f64 {
    assert!(x >= 2);
    let xf = x as f64;
    prime_pi(x) as f64 / (xf / xf.ln())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// `2^⌈log2 l⌉`.
pub fn pow2_ceil(l: u64) -> u64 {
    assert!(l >= 1);
    l.next_power_of_two()
}

/// Primes not exceeding `2^⌈log2 n⌉`.
pub fn p1(n: u64) -> u64 {
    prime_pi(pow2_ceil(n))
}

/// Primes not exceeding `2^⌈log2 l⌉` that divide `|a - b|`.
pub fn p2(l: u64, a: u128, b: u128) -> u64 {
    count_dividing(&primes_up_to(pow2_ceil(l)), a.abs_diff(b))
}

fn count_dividing(primes: &[u64], d: u128) -> u64 {
    primes.iter().filter(|&&p| d.is_multiple_of(u128::from(p))).count() as u64
}

/// Maximum of `p2(l, a, b)` over `a < 2^n`, `b ≤ 2^n`, `a ≠ b`, by enumeration.
pub fn p3_exact(l: u64, n: u32) -> Result<u64, AnalysisError> {
    if n > P3_MAX_N {
        return Err(AnalysisError::Infeasible(format!("exhaustive P3 needs n ≤ {P3_MAX_N}, got {n}")));
    }
    let primes = primes_up_to(pow2_ceil(l));
    let top = 1u128 << n;
    let mut best = 0;
    for a in 0..top {
        for b in 0..=top {
            if a != b {
                best = best.max(count_dividing(&primes, a.abs_diff(b)));
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FingerprintStats {
    pub l: u64,
    pub n: u32,
    pub p1: u64,
    pub samples: u64,
    pub p2_mean: f64,
    pub p2_max: u64,
    /// Present when `n ≤ P3_MAX_N`.
    pub p3: Option<u64>,
}

fn draw_bits<R: BitSource + ?Sized>(rng: &mut R, bits: u32) -> u128 {
    (0..bits).fold(0u128, |v, _| 2 * v + u128::from(rng.next_bit()))
}

/// `p2` over `samples` random pairs `a < 2^n`, `b ≤ 2^n`, `a ≠ b`.
pub fn fingerprint_stats<R: BitSource + ?Sized>(
    l: u64,
    n: u32,
    samples: u64,
    rng: &mut R,
) -> Result<FingerprintStats, AnalysisError> {
    if n == 0 || n > 100 {
        return Err(AnalysisError::Infeasible(format!("n = {n} (supported: 1..=100)")));
    }
    let primes = primes_up_to(pow2_ceil(l));
    let top = 1u128 << n;
    let (mut total, mut max) = (0u64, 0u64);
    for _ in 0..samples {
        let a = draw_bits(rng, n);
        let b = loop {
            let b = draw_bits(rng, n + 1);
            if b <= top && b != a {
                break b;
            }
        };
        let c = count_dividing(&primes, a.abs_diff(b));
        total += c;
        max = max.max(c);
    }
    Ok(FingerprintStats {
        l,
        n,
        p1: primes.len() as u64,
        samples,
        p2_mean: if samples == 0 { 0.0 } else { total as f64 / samples as f64 },
        p2_max: max,
        p3: (n <= P3_MAX_N).then(|| p3_exact(l, n)).transpose()?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttemptStats {
    pub bit_len: u32,
    pub trials: u64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `bit_len · ln 2`.
    pub predicted: f64,
}

/// Attempts needed to hit a prime with `bit_len` uniform bits, leading bit free.
pub fn prime_attempt_stats<R: BitSource + ?Sized>(
    bit_len: u32,
    trials: u64,
    rng: &mut R,
) -> Result<AttemptStats, AnalysisError> {
    if !(2..=64).contains(&bit_len) || trials == 0 {
        return Err(AnalysisError::Infeasible(format!(
            "bit length {bit_len} (supported: 2..=64) with {trials} trials"
        )));
    }
    let mut counts = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let mut attempts = 1u64;
        while !is_prime_u64(draw_bits(rng, bit_len) as u64) {
            attempts += 1;
        }
        counts.push(attempts);
    }
    let draws: u64 = counts.iter().sum();
    let mean = draws as f64 / trials as f64;
    // The score interval of the per-draw hit rate, inverted.
    let (lo, hi) = wilson_interval(trials, draws, 0.99);
    Ok(AttemptStats {
        bit_len,
        trials,
        mean,
        ci_low: 1.0 / hi,
        ci_high: 1.0 / lo.max(f64::MIN_POSITIVE),
        predicted: f64::from(bit_len) * std::f64::consts::LN_2,
    })
}
