use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use rtpm::analysis::{
    bit_extraction_prob, decision_bit_prob, default_truncation, fingerprint_stats, p1, p2, p3_exact,
    prime_attempt_stats, prime_pi, ratio_to_pnt, wilson_interval,
};
use rtpm::coin::{truncate_p, SetSpec};
use rtpm::machine::random::SeededBits;

/// The same sum walked from `h = n` down, starting at `a^n`.
fn bit_sum_descending(n: u64, a: &BigUint, b: &BigUint, bit: u32) -> BigUint {
    assert!(!a.is_zero());
    let mut term = a.pow(n as u32);
    let mut sum = BigUint::zero();
    for h in (0..=n).rev() {
        if (h >> bit) & 1 == 1 {
            sum += &term;
        }
        if h > 0 {
            term *= h;
            term /= n - h + 1;
            term *= b;
            term /= a;
        }
    }
    sum
}

/// Log-space double precision sum of the same event.
fn bit_sum_f64(n: u64, p: f64, bit: u32) -> f64 {
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let lnf = |x: u64| ln_gamma(x as f64 + 1.0);
    (0..=n)
        .filter(|h| (h >> bit) & 1 == 1)
        .map(|h| (lnf(n) - lnf(h) - lnf(n - h) + h as f64 * lp + (n - h) as f64 * lq).exp())
        .sum()
}

fn periodic(prefix: &[bool], period: &[bool]) -> SetSpec {
    SetSpec::Periodic {
        prefix: prefix.to_vec(),
        period: period.to_vec(),
    }
}

#[test]
fn exact_sums_agree_in_both_orders() {
    let sets = [
        SetSpec::finite([1]),
        SetSpec::all(),
        SetSpec::finite([2, 5]),
        periodic(&[false], &[true, false]),
    ];
    for set in &sets {
        for k in 1..=2u32 {
            let m = default_truncation(k);
            let r = decision_bit_prob(k, set, m).unwrap();
            let exact = r.exact.clone().unwrap();
            let a = truncate_p(set, m).numer;
            let b = (BigUint::one() << m) - &a;
            let n = 1u64 << (6 * k);
            assert_eq!(exact.numer, bit_sum_descending(n, &a, &b, 3 * k + 2), "{set:?} k = {k}");
            assert_eq!(exact.denom_log2, u64::from(m) * n);
        }
    }
}

#[test]
fn high_precision_sum_matches_log_space() {
    for set in [SetSpec::finite([1, 3]), SetSpec::finite([1, 2])] {
        let r = decision_bit_prob(3, &set, default_truncation(3)).unwrap();
        let p = truncate_p(&set, 58).to_f64();
        let oracle = bit_sum_f64(1 << 18, p, 11);
        assert!((r.value - oracle).abs() < 1e-9, "{} vs {oracle}", r.value);
        assert!(r.error_bound > 0.0 && r.error_bound < 1e-10);
    }
}

#[test]
fn frozen_reference_value() {
    // Evaluated separately in 50-digit arithmetic at M = 46.
    let r = bit_extraction_prob(1, &SetSpec::finite([1]), 46).unwrap();
    assert!((r.value - 0.993_233_35).abs() < 1e-8, "{}", r.value);
    assert!((r.error_bound - 2f64.powi(-40)).abs() < 1e-20);
}

#[test]
fn three_quarters_for_every_bit_and_tail() {
    for k in 1..=2u64 {
        for x in [false, true] {
            for tail in [false, true] {
                let mut prefix = vec![false; k as usize];
                prefix[k as usize - 1] = x;
                // Earlier bits alternate to keep the prefix generic.
                for (i, b) in prefix.iter_mut().enumerate().take(k as usize - 1) {
                    *b = i % 2 == 0;
                }
                let set = periodic(&prefix, &[tail]);
                let r = bit_extraction_prob(k as u32, &set, default_truncation(k as u32)).unwrap();
                assert!(r.value - r.error_bound >= 0.75, "k {k} x {x} tail {tail}: {}", r.value);
            }
        }
    }
}

#[test]
fn wilson_interval_covers_at_the_stated_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for p in [0.05, 0.5, 0.93] {
        let reps = 2000;
        let mut covered = 0;
        for _ in 0..reps {
            let s = (0..400).filter(|_| rng.gen_bool(p)).count() as u64;
            let (lo, hi) = wilson_interval(s, 400, 0.99);
            covered += u32::from(lo <= p && p <= hi);
        }
        // 99% nominal; 1960 of 2000 is about four standard errors below.
        assert!(covered >= 1960, "p = {p}: {covered}/{reps}");
    }
}

#[test]
fn prime_counts() {
    assert_eq!(prime_pi(100), 25);
    assert_eq!(p1(100), 31);
    assert_eq!(p2(4, 10, 2), 1);
    let r = ratio_to_pnt(1_000_000);
    assert!(r > 1.0 && r < 1.1, "{r}");
}

#[test]
fn collision_maximum_by_differences() {
    // Every difference 1..=2^n occurs, so the maximum is over those.
    for n in 1..=8u32 {
        for l in [2u64, 5, 16, 40] {
            let primes: Vec<u64> = (2..=l.next_power_of_two()).filter(|&q| (2..q).all(|d| q % d != 0)).collect();
            let best = (1..=1u64 << n)
                .map(|d| primes.iter().filter(|&&q| d % q == 0).count() as u64)
                .max()
                .unwrap();
            assert_eq!(p3_exact(l, n).unwrap(), best, "l {l} n {n}");
        }
    }
}

#[test]
fn fingerprint_sampling() {
    let s = fingerprint_stats(64, 8, 500, &mut SeededBits::new(3)).unwrap();
    assert_eq!(s.p1, 18);
    assert!(s.p2_max <= s.p3.unwrap());
    assert!(s.p2_mean > 0.0 && s.p2_mean < s.p1 as f64);
}

#[test]
fn prime_attempts_near_prediction() {
    let s = prime_attempt_stats(20, 4000, &mut SeededBits::new(8)).unwrap();
    // Uniform 20-bit draws: π(2^20) / 2^20 = 82025 / 1048576.
    let expected = 1_048_576.0 / 82_025.0;
    assert!(s.ci_low <= expected && expected <= s.ci_high, "{s:?}");
    assert!((s.predicted - 20.0 * std::f64::consts::LN_2).abs() < 1e-12);
}

proptest! {
    #[test]
    fn exact_values_are_probabilities(bits in proptest::collection::vec(any::<bool>(), 1..6), period in proptest::collection::vec(any::<bool>(), 1..4)) {
        let set = periodic(&bits, &period);
        let r = decision_bit_prob(1, &set, 46).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.value));
        let e = r.exact.unwrap();
        prop_assert!(e.numer <= BigUint::one() << e.denom_log2);
    }
}
