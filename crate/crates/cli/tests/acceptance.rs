//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde_json::Value;

use rtpm::analysis::{
    acceptance_oracle_unary, bit_extraction_prob, decision_bit_prob, default_truncation, estimate_with,
    sample_decision_bit, EstimateReport,
};
use rtpm::coin::SetSpec;
use rtpm::constructions::{
    build_loglog_oneway, build_p4ca, build_ulog_machine, P4caState,
};
use rtpm::languages::{loglog_word, LoglogConfig, UnaryFamily};
use rtpm::machine::counter::{run_counter_machine, CounterRun};
use rtpm::machine::random::SeededBits;
use rtpm::machine::tape::run_tape_machine;
use rtpm::machine::{EngineError, Input, Limits, RunOutcome, Verdict};
use rtpm_cli::report::strip_volatile;
use rtpm_cli::verify;

const LEVEL: f64 = 0.99;
const FACT1_MIN: f64 = 0.75;
const FACT1_MAX_ERROR: f64 = 1e-6;
const FACT1_K1_SECONDS: f64 = 1.0;
const FACT1_K2_SECONDS: f64 = 60.0;
const MC_SAMPLES: u64 = 100_000;
const MC_SIGMAS: f64 = 3.0;
const SLOW_SCAN_LIMIT: u128 = 17_000_000;
const SLOW_SCAN_SECONDS: f64 = 300.0;
const UNARY_TRIALS: u64 = 2000;
const ULOG_MEMBER_MIN: f64 = 0.70;
const ULOG_NONMEMBER_MAX: f64 = 0.30;
const SKELETON_CHECKPOINTS: usize = 10_000;
const MINSKY_MACHINES: u64 = 20;
const MINSKY_STEPS: u64 = 50;
const LOGLOG_TRIALS: u64 = 400;
const LOGLOG_MEMBER_MIN: f64 = 0.60;
const LOGLOG_CORRUPT_REJECT_MIN: f64 = 0.90;
const EQUAL_TIME_INPUTS: usize = 50;
const PADDING_MUTATIONS: u64 = 100;
const ATTEMPT_BITS: u32 = 16;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Realtime runs seen anywhere in the suite and how many missed `n + 2`.
struct RealtimeTally {
    runs: AtomicU64,
    violations: AtomicU64,
}

static REALTIME: RealtimeTally = RealtimeTally {
    runs: AtomicU64::new(0),
    violations: AtomicU64::new(0),
};

fn tally(n: u128, r: Result<RunOutcome, EngineError>) -> Result<RunOutcome, EngineError> {
    REALTIME.runs.fetch_add(1, Ordering::Relaxed);
    match &r {
        Ok(o) if o.total_steps == n + 2 => {}
        _ => {
            REALTIME.violations.fetch_add(1, Ordering::Relaxed);
        }
    }
    r
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn periodic(prefix: Vec<bool>, tail: bool) -> SetSpec {
    SetSpec::Periodic {
        prefix,
        period: vec![tail],
    }
}

fn ulog_estimate(set: &SetSpec, n: u64, seed: u64) -> EstimateReport {
    let m = build_ulog_machine(set);
    let input = Input::unary(n);
    estimate_with(
        |rng| tally(u128::from(n), run_tape_machine(&m, &input, rng, &Limits::default())),
        UNARY_TRIALS,
        seed,
        LEVEL,
        workers(),
    )
}

/// The oracle lies in the interval widened by its error bound.
fn oracle_in_ci(r: &EstimateReport, family: UnaryFamily, set: &SetSpec, n: u64) -> (bool, f64) {
    let o = acceptance_oracle_unary(family, set, &BigUint::from(n)).expect("oracle");
    (o.value + o.error_bound >= r.ci_low && o.value - o.error_bound <= r.ci_high, o.value)
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for k in 1..=2u32 {
        let mut slowest = Duration::ZERO;
        let mut lowest = f64::INFINITY;
        let mut worst_err = 0f64;
        for x in [false, true] {
            for tail in [false, true] {
                let mut prefix: Vec<bool> = (0..k - 1).map(|i| i % 2 == 0).collect();
                prefix.push(x);
                let set = periodic(prefix, tail);
                let start = Instant::now();
                let r = bit_extraction_prob(k, &set, default_truncation(k)).expect("feasible");
                slowest = slowest.max(start.elapsed());
                lowest = lowest.min(r.value);
                worst_err = worst_err.max(r.error_bound);
            }
        }
        let limit = if k == 1 { FACT1_K1_SECONDS } else { FACT1_K2_SECONDS };
        pass &= lowest >= FACT1_MIN && worst_err < FACT1_MAX_ERROR && slowest.as_secs_f64() < limit;
        notes.push(format!(
            "k={k}: min {lowest:.6}, max error {worst_err:.1e}, slowest {:.3}s",
            slowest.as_secs_f64()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn criterion_2() -> Outcome {
    let set = SetSpec::finite([1]);
    let v = decision_bit_prob(1, &set, default_truncation(1)).expect("feasible").value;
    let ones = (0..MC_SAMPLES)
        .filter(|&t| sample_decision_bit(1, &set, &mut SeededBits::substream(2024, t)).expect("coin"))
        .count();
    let freq = ones as f64 / MC_SAMPLES as f64;
    let tol = MC_SIGMAS * (v * (1.0 - v) / MC_SAMPLES as f64).sqrt();
    outcome(
        (freq - v).abs() <= tol,
        format!("empirical {freq:.5}, exact {v:.5}, |diff| {:.5} <= {tol:.5}", (freq - v).abs()),
    )
}

fn criterion_3() -> Outcome {
    let quick = verify::scan_family(UnaryFamily::Ulog, 200_000, 1).expect("scan");
    let start = Instant::now();
    let slow = verify::scan_family(UnaryFamily::Ulog, SLOW_SCAN_LIMIT, 2).expect("scan");
    let secs = start.elapsed().as_secs_f64();
    let pass = quick.boundaries == [1792, 190208]
        && slow.boundaries == [1792, 190208, 16967424]
        && secs < SLOW_SCAN_SECONDS;
    outcome(
        pass,
        format!("to 2e5: {:?}; to 1.7e7: {:?} in {secs:.1}s", quick.boundaries, slow.boundaries),
    )
}

fn criterion_4() -> Outcome {
    let set = SetSpec::finite([1]);
    let member = ulog_estimate(&set, 1792, 41);
    let (in_ci, oracle) = oracle_in_ci(&member, UnaryFamily::Ulog, &set, 1792);
    let outside = ulog_estimate(&set, 190208, 42);

    let m = build_ulog_machine(&set);
    let input = Input::unary(1793);
    let mut bad = 0;
    for t in 0..UNARY_TRIALS {
        let o = tally(1793, run_tape_machine(&m, &input, &mut SeededBits::substream(43, t), &Limits::default()))
            .expect("run");
        bad += u32::from(o.verdict != Verdict::Rejected || o.total_steps != 1795);
    }
    let pass = in_ci && member.point_estimate > ULOG_MEMBER_MIN && outside.point_estimate < ULOG_NONMEMBER_MAX && bad == 0;
    outcome(
        pass,
        format!(
            "n=1792: {:.4} [{:.4}, {:.4}] vs oracle {oracle:.4}; n=190208: {:.4}; n=1793: {bad} runs not rejected in 1795 steps",
            member.point_estimate, member.ci_low, member.ci_high, outside.point_estimate
        ),
    )
}

fn criterion_5() -> Outcome {
    // Extra lengths on top of the runs made by the other criteria.
    let ulog = build_ulog_machine(&SetSpec::all());
    let p4ca = build_p4ca(&SetSpec::all());
    for n in (0..400u64).chain([1791, 1794, 8703, 8705, 20_000]) {
        for seed in 0..3 {
            let _ = tally(
                u128::from(n),
                run_tape_machine(&ulog, &Input::unary(n), &mut SeededBits::new(seed), &Limits::default()),
            );
            let _ = tally(
                u128::from(n),
                run_counter_machine(&p4ca, &BigUint::from(n), &mut SeededBits::new(seed), &Limits::default()),
            );
        }
    }
    let runs = REALTIME.runs.load(Ordering::Relaxed);
    let violations = REALTIME.violations.load(Ordering::Relaxed);
    outcome(violations == 0 && runs > 0, format!("{runs} realtime runs, {violations} not taking n+2 steps"))
}

fn criterion_6() -> Outcome {
    let n = 190_208u64;
    let every = (n as u128 + 2) / SKELETON_CHECKPOINTS as u128;
    let (h1, b1, s1) = verify::ulog_skeleton(n, 5, every).expect("run");
    let (h2, b2, s2) = verify::ulog_skeleton(n, 6, every).expect("run");
    let pass = h1.len() >= SKELETON_CHECKPOINTS && h1 == h2 && b1 == b2 && s1 == s2;
    outcome(
        pass,
        format!("{} checkpoints, traces equal: {}, boundary instants {:?} / {:?}", h1.len(), h1 == h2, b1, b2),
    )
}

fn criterion_7() -> Outcome {
    let scan = verify::scan_family(UnaryFamily::Up4ca, 600_000, 3).expect("scan");
    let set = SetSpec::finite([1]);
    let m = build_p4ca(&set);
    let n = BigUint::from(128u32);
    let r = estimate_with(
        |rng| tally(128, run_counter_machine(&m, &n, rng, &Limits::default())),
        UNARY_TRIALS,
        44,
        LEVEL,
        workers(),
    );
    let (in_ci, oracle) = oracle_in_ci(&r, UnaryFamily::Up4ca, &set, 128);

    // Iteration m holds C2 + C3 = 4·8^m throughout its coin phase.
    let mut run = CounterRun::new(&m, Some(540_000));
    let mut rng = SeededBits::new(9);
    let (mut iteration, mut sampled, mut broken) = (1u32, 0u64, 0u64);
    while run.halted().is_none() && run.config.steps < 540_000 {
        run.step(&mut rng).expect("step");
        if let P4caState::Coin { .. } = run.config.state {
            let c = &run.config.counters;
            sampled += 1;
            broken += u64::from(c[1] + c[2] != 4 * 8u128.pow(iteration));
        }
        if run.phase_tag().is_some_and(|t| t.boundary) {
            iteration += 1;
        }
    }
    let pass = scan.boundaries == [128, 8704, 536064] && in_ci && broken == 0 && sampled > 0;
    outcome(
        pass,
        format!(
            "boundaries {:?}; n=128: {:.4} [{:.4}, {:.4}] vs oracle {oracle:.4}; invariant broken at {broken} of {sampled} coin steps",
            scan.boundaries, r.point_estimate, r.ci_low, r.ci_high
        ),
    )
}

fn criterion_8() -> Outcome {
    let c = verify::minsky(MINSKY_MACHINES, MINSKY_STEPS, 100).expect("lockstep");
    let mismatches: usize = c.details["machines"]
        .as_array()
        .map_or(0, |a| a.iter().map(|m| m["mismatches"].as_array().map_or(0, Vec::len)).sum());
    outcome(c.pass, format!("{}; {mismatches} mismatches", c.summary))
}

fn loglog_rate(m: &rtpm::constructions::LoglogMachine, w: &[u8], seed: u64, want: Verdict) -> f64 {
    let input = Input::word(w);
    let r = estimate_with(|rng| run_tape_machine(m, &input, rng, &Limits::default()), LOGLOG_TRIALS, seed, LEVEL, workers());
    let hits = match want {
        Verdict::Accepted => r.verdict_counts.accepted,
        _ => r.verdict_counts.rejected,
    };
    hits as f64 / LOGLOG_TRIALS as f64
}

fn criterion_9() -> Outcome {
    let cfg = LoglogConfig::scaled();
    let m = build_loglog_oneway(&SetSpec::all(), &cfg);
    let member = loglog_word(8, &cfg).expect("chain");
    let accept = loglog_rate(&m, &member, 50, Verdict::Accepted);

    // Every single-bit flip of a block digit.
    let mut worst = (1.0f64, 0usize);
    let mut corruptions = 0;
    for i in 0..member.len() {
        if !matches!(member[i], b'0' | b'1') {
            continue;
        }
        let mut w = member.clone();
        w[i] ^= 1;
        corruptions += 1;
        let rate = loglog_rate(&m, &w, 60 + i as u64, Verdict::Rejected);
        if rate < worst.0 {
            worst = (rate, i);
        }
    }

    // Chains whose last block has an inadmissible length.
    let mut escaped = 0;
    let mut predicate_runs = 0;
    for s in [2u64, 3, 5, 6, 7, 16, 17, 25, 31] {
        let w = loglog_word(s, &cfg).expect("chain");
        for seed in 0..20 {
            predicate_runs += 1;
            let o = run_tape_machine(&m, &Input::word(&w), &mut SeededBits::new(seed), &Limits::default()).expect("run");
            escaped += u32::from(o.verdict != Verdict::Rejected);
        }
    }
    let pass = accept >= LOGLOG_MEMBER_MIN && worst.0 >= LOGLOG_CORRUPT_REJECT_MIN && escaped == 0;
    outcome(
        pass,
        format!(
            "member accepted {accept:.3}; {corruptions} corruptions, lowest rejection {:.3} (digit {}); length-predicate: {escaped} of {predicate_runs} runs not rejected",
            worst.0, worst.1
        ),
    )
}

fn criterion_10() -> Outcome {
    let et = verify::equal_time(EQUAL_TIME_INPUTS, 2, 2, 9, 7).expect("runs");
    let pad = verify::padding(&verify::PaddingParams {
        s: 8,
        c: 2,
        set: SetSpec::all(),
        trials: LOGLOG_TRIALS,
        mutations: PADDING_MUTATIONS,
        probe_seeds: 2,
        seed: 70,
    })
    .expect("padding");
    let steps = pad.details["padded"]["trials"].as_u64().unwrap_or(0);
    REALTIME.runs.fetch_add(steps, Ordering::Relaxed);
    if pad.details["realtimeSteps"] != Value::Bool(true) {
        REALTIME.violations.fetch_add(1, Ordering::Relaxed);
    }
    outcome(et.pass && pad.pass, format!("{}; {}", et.summary, pad.summary))
}

fn criterion_11() -> Outcome {
    let c = verify::fingerprint(&verify::FingerprintParams {
        l: 64,
        n: 8,
        samples: 1000,
        bit_len: ATTEMPT_BITS,
        attempts: 2000,
        seed: 11,
    })
    .expect("fingerprint");
    outcome(c.pass, c.summary)
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_rtpm")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8")
}

fn stripped(text: &str) -> String {
    serde_json::to_string(&strip_volatile(serde_json::from_str(text).expect("json"))).expect("json")
}

fn criterion_12() -> Outcome {
    let dir = std::env::temp_dir().join(format!("rtpm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let config = dir.join("experiment.toml");
    std::fs::write(
        &config,
        "trials = 400\nmasterSeed = 12\nworkers = 4\nn = \"1792\"\n[machine]\nname = \"ulog\"\nset = \"finite:1\"\n",
    )
    .expect("write config");
    let c = config.to_str().expect("utf-8 path");
    let a = cli(&["estimate", "--config", c]);
    let b = cli(&["estimate", "--config", c]);
    let serial = cli(&["estimate", "--config", c, "--workers", "1"]);
    let byte_equal = stripped(&a) == stripped(&b);
    let mut va = strip_volatile(serde_json::from_str(&a).expect("json"));
    let mut vs = strip_volatile(serde_json::from_str(&serial).expect("json"));
    va["config"]["workers"] = Value::Null;
    vs["config"]["workers"] = Value::Null;
    let serial_equal = va == vs;
    let word = ["run", "--machine", "loglog", "--s", "12", "--seed", "4"];
    let runs_equal = cli(&word) == cli(&word);
    std::fs::remove_dir_all(&dir).ok();
    outcome(
        byte_equal && serial_equal && runs_equal,
        format!("repeat estimate identical: {byte_equal}; 1 vs 4 workers identical: {serial_equal}; repeat run identical: {runs_equal}"),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("fact-1 exactness", criterion_1),
        ("fact-1 Monte-Carlo agreement", criterion_2),
        ("ULOG boundaries", criterion_3),
        ("ULOG recognition", criterion_4),
        ("P4CA boundaries and recognition", criterion_7),
        ("Minsky equivalence", criterion_8),
        ("LOGLOG scaled end-to-end", criterion_9),
        ("equal-time and padding", criterion_10),
        ("prime statistics", criterion_11),
        ("reproducibility", criterion_12),
        ("skeleton determinism", criterion_6),
        // Last, so it sees the realtime runs of the others.
        ("realtime contract", criterion_5),
    ];
    let numbers = [1, 2, 3, 4, 7, 8, 9, 10, 11, 12, 6, 5];
    let mut results = Vec::new();
    for ((name, f), n) in criteria.into_iter().zip(numbers) {
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {n:>2} {name}: {} ({:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        results.push((n, o.pass));
    }
    results.sort();
    let failed: Vec<u32> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
