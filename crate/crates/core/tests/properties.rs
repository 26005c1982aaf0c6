use num_bigint::BigUint;
use proptest::prelude::*;

use rtpm::analysis::{acceptance_oracle_unary, estimate_acceptance, estimate_acceptance_counter, wilson_interval};
use rtpm::coin::{p_bit, truncate_p, Coin, SetSpec};
use rtpm::constructions::{build_loglog_oneway, build_p4ca, build_ulog_machine};
use rtpm::languages::loglog::successor_ok;
use rtpm::languages::*;
use rtpm::machine::counter::{run_counter_machine, CounterRun};
use rtpm::machine::random::{BitSource, ScriptedBits, SeededBits};
use rtpm::machine::tape::{run_tape_machine, TapeRun};
use rtpm::machine::{Input, Limits};

fn set_strategy() -> impl Strategy<Value = SetSpec> {
    prop_oneof![
        proptest::collection::btree_set(1u64..40, 0..6).prop_map(SetSpec::Finite),
        (proptest::collection::vec(any::<bool>(), 0..5), proptest::collection::vec(any::<bool>(), 1..4))
            .prop_map(|(prefix, period)| SetSpec::Periodic { prefix, period }),
        prop::sample::select(vec!["preset:all", "preset:primes", "preset:squares", "preset:evens"])
            .prop_map(|s| s.parse().unwrap()),
    ]
}

/// The bits of `v` as `m` forced draws, most significant first.
fn prefix_bits(v: u32, m: u32) -> Vec<bool> {
    (0..m).rev().map(|b| v >> b & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_are_x_zero_one(set in set_strategy(), t in 1u64..10_000) {
        prop_assert_eq!(p_bit(&set, 3 * t - 2), set.contains(t));
        prop_assert!(!p_bit(&set, 3 * t - 1));
        prop_assert!(p_bit(&set, 3 * t));
    }

    // Enumerating every prefix of m forced bits: exactly truncate_p(m)·2^m of
    // them decide heads, and at most one leaves the flip undecided.
    #[test]
    fn sampler_is_exact_at_dyadic_cutoffs(set in set_strategy(), m in 1u32..=12) {
        let coin = Coin::new(set.clone());
        let (mut heads, mut open) = (0u32, 0u32);
        for v in 0..1u32 << m {
            let mut bits = prefix_bits(v, m);
            // Past the prefix, draws oppose p so the flip ends at once.
            bits.extend((m as u64 + 1..=m as u64 + 1).map(|j| !p_bit(&set, j)));
            let mut rng = ScriptedBits::new(bits);
            let h = coin.flip(&mut rng).unwrap();
            if rng.drawn() > u64::from(m) {
                open += 1;
            } else {
                heads += u32::from(h);
            }
        }
        prop_assert_eq!(BigUint::from(heads), truncate_p(&set, m).numer);
        prop_assert!(open <= 1);
    }

    #[test]
    fn flip_stops_at_first_disagreement(set in set_strategy(), bits in proptest::collection::vec(any::<bool>(), 1..40)) {
        let coin = Coin::new(set.clone());
        let first = (1..=bits.len() as u64).find(|&j| bits[j as usize - 1] != p_bit(&set, j));
        let mut rng = ScriptedBits::new(bits.clone());
        let h = coin.flip(&mut rng).unwrap();
        if let Some(j) = first {
            prop_assert_eq!(rng.drawn(), j);
            prop_assert_eq!(h, p_bit(&set, j));
        }
    }

    #[test]
    fn set_text_round_trips(set in set_strategy()) {
        let back: SetSpec = set.to_string().parse().unwrap();
        for t in 1..200 {
            prop_assert_eq!(back.contains(t), set.contains(t));
        }
    }

    #[test]
    fn realtime_machines_take_n_plus_two(n in 0u64..6000, seed in any::<u64>(), set in set_strategy()) {
        let u = run_tape_machine(&build_ulog_machine(&set), &Input::unary(n), &mut SeededBits::new(seed), &Limits::default()).unwrap();
        prop_assert_eq!(u.total_steps, u128::from(n) + 2);
        let p = run_counter_machine(&build_p4ca(&set), &BigUint::from(n), &mut SeededBits::new(seed), &Limits::default()).unwrap();
        prop_assert_eq!(p.total_steps, u128::from(n) + 2);
    }

    #[test]
    fn same_seed_same_trace(n in 0u64..3000, seed in any::<u64>()) {
        let m = build_ulog_machine(&SetSpec::finite([1]));
        let input = Input::unary(n);
        let trace = |seed| {
            let mut run = TapeRun::new(&m, &input);
            let mut states = Vec::new();
            let out = run.run_observed(&mut SeededBits::new(seed), &Limits::default(), |r| {
                states.push((r.config.state, r.config.tape.head(), r.config.tape.read()));
            }).unwrap();
            (out, states)
        };
        prop_assert_eq!(trace(seed), trace(seed));
    }

    #[test]
    fn same_seed_same_loglog_outcome(s in 1u64..14, seed in any::<u64>()) {
        let cfg = LoglogConfig::scaled();
        let m = build_loglog_oneway(&SetSpec::all(), &cfg);
        let w = loglog_word(s, &cfg).unwrap();
        let a = run_tape_machine(&m, &Input::word(&w), &mut SeededBits::new(seed), &Limits::default()).unwrap();
        let b = run_tape_machine(&m, &Input::word(&w), &mut SeededBits::new(seed), &Limits::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    // The first counter and the phase tags do not depend on the coin.
    #[test]
    fn p4ca_skeleton_is_coin_free(a in any::<u64>(), b in any::<u64>()) {
        let m = build_p4ca(&SetSpec::finite([1, 2]));
        let skeleton = |seed| {
            let mut run = CounterRun::new(&m, Some(9000));
            let mut rng = SeededBits::new(seed);
            let mut seq = Vec::new();
            while run.halted().is_none() {
                run.step(&mut rng).unwrap();
                seq.push((run.config.counters[0], run.phase_tag()));
            }
            seq
        };
        prop_assert_eq!(skeleton(a), skeleton(b));
    }

    #[test]
    fn successor_pairs(i in 1u64..1 << 20, flip in 0usize..21) {
        let prev = format!("{i:b}").into_bytes();
        let next = format!("{:b}", i + 1).into_bytes();
        prop_assert!(successor_ok(&prev, &next));
        let mut bad = next.clone();
        let at = flip % bad.len();
        bad[at] ^= 1;
        prop_assert!(!successor_ok(&prev, &bad));
    }

    #[test]
    fn generated_chains_validate_iff_admissible(s in 1u64..3000) {
        let cfg = LoglogConfig::scaled();
        let w = loglog_word(s, &cfg).unwrap();
        let m = 64 - s.leading_zeros();
        match cfg.k_for_length(u64::from(m)) {
            Some(k) => prop_assert_eq!(loglog_validate(&w, &cfg), Ok(k)),
            None => prop_assert_eq!(loglog_validate(&w, &cfg).unwrap_err().reason, FailureReason::LengthPredicate),
        }
    }
}

#[test]
fn flips_use_about_two_bits() {
    let coin = Coin::new(SetSpec::finite([2, 3]));
    let mut rng = SeededBits::new(4);
    let flips = 20_000;
    for _ in 0..flips {
        coin.flip(&mut rng).unwrap();
    }
    let mean = rng.drawn() as f64 / flips as f64;
    // Exactly 2 in expectation; the standard error here is about 0.01.
    assert!(mean <= 2.05, "{mean}");
}

#[test]
fn fair_coin_intervals_cover_one_half() {
    let mut covered = 0;
    for meta in 0..100 {
        let mut rng = SeededBits::new(1000 + meta);
        let heads = (0..500).filter(|_| rng.next_bit()).count() as u64;
        let (lo, hi) = wilson_interval(heads, 500, 0.99);
        covered += u32::from(lo <= 0.5 && 0.5 <= hi);
    }
    assert!(covered >= 95, "{covered}");
}

#[test]
fn coin_flips_per_iteration() {
    let m = build_ulog_machine(&SetSpec::all());
    let out = run_tape_machine(&m, &Input::unary(190_208), &mut SeededBits::new(2), &Limits::default()).unwrap();
    assert_eq!(out.coin_flips, 64 + 4096);
    let p = build_p4ca(&SetSpec::all());
    let out = run_counter_machine(&p, &BigUint::from(8704u32), &mut SeededBits::new(2), &Limits::default()).unwrap();
    assert_eq!(out.coin_flips, 64 + 4096);
}

#[test]
fn ulog_cells_grow_by_nine_per_iteration() {
    let m = build_ulog_machine(&SetSpec::all());
    let cells: Vec<u64> = [1792u64, 190_208]
        .iter()
        .map(|&n| {
            run_tape_machine(&m, &Input::unary(n), &mut SeededBits::new(1), &Limits::default())
                .unwrap()
                .max_cells
        })
        .collect();
    assert_eq!(cells, vec![15, 24]);
}

#[test]
fn engine_matches_oracle_on_small_members() {
    let limits = Limits::default();
    for set in [SetSpec::finite([1]), SetSpec::finite([2]), SetSpec::empty()] {
        let cases = [(UnaryFamily::Up4ca, 128u64), (UnaryFamily::Up4ca, 8704), (UnaryFamily::Ulog, 1792)];
        for (family, n) in cases {
            let trials = 600;
            let r = match family {
                UnaryFamily::Ulog => estimate_acceptance(&build_ulog_machine(&set), &Input::unary(n), trials, 5, 0.99, 1, &limits),
                UnaryFamily::Up4ca => estimate_acceptance_counter(&build_p4ca(&set), &BigUint::from(n), trials, 5, 0.99, 1, &limits),
            };
            let o = acceptance_oracle_unary(family, &set, &BigUint::from(n)).unwrap();
            let v = o.value;
            let tol = 3.0 * (v * (1.0 - v) / trials as f64).sqrt() + o.error_bound;
            // A binomial count is at least one trial away from v unless v is
            // a multiple of 1/trials.
            let tol = tol.max(1.0 / trials as f64);
            assert!((r.point_estimate - v).abs() <= tol, "{family} {set} n={n}: {} vs {v}", r.point_estimate);
            assert!(r.verdict_counts.resource_limit == 0 && r.verdict_counts.errors == 0);
        }
    }
    // Non-members are rejected outright.
    let r = estimate_acceptance(&build_ulog_machine(&SetSpec::all()), &Input::unary(1800), 50, 1, 0.99, 1, &limits);
    assert_eq!(r.successes, 0);
}
