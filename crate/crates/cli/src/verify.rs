//! Checks behind `rtpm verify`. Each returns a [`Check`]; a failed check is
//! a contract violation (exit code 2).

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use rtpm::analysis::{
    bit_extraction_prob, estimate_with, fingerprint_stats, p2, p3_exact, prime_attempt_stats, primes_up_to,
    EstimateReport,
};
use rtpm::coin::SetSpec;
use rtpm::constructions::{
    build_loglog_equaltime, build_p4ca, build_ulog_machine, minsky_lockstep, pad_input, pad_to_realtime, PAD,
};
use rtpm::languages::{loglog_word, LoglogConfig, UnaryFamily};
use rtpm::machine::instants::{scan_counter_instants, scan_tape_instants, ScanReport};
use rtpm::machine::random::{BitSource, SeededBits};
use rtpm::machine::tape::run_tape_machine;
use rtpm::machine::{EngineError, Input, Limits, Verdict};

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub details: Value,
}

fn engine(e: EngineError) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Uniform draw from `0..bound` by rejection.
pub fn draw_below<R: BitSource + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0);
    let bits = 64 - (bound - 1).leading_zeros();
    loop {
        let v = (0..bits).fold(0u64, |v, _| 2 * v + u64::from(rng.next_bit()));
        if v < bound {
            return v;
        }
    }
}

pub fn fact1(k: u32, set: &SetSpec, m: Option<u32>) -> Result<Check, CliError> {
    let m = m.unwrap_or_else(|| rtpm::analysis::default_truncation(k));
    let r = bit_extraction_prob(k, set, m).map_err(|e| CliError::Usage(e.to_string()))?;
    let x = set.contains(u64::from(k));
    let pass = r.value - r.error_bound >= 0.75;
    Ok(Check {
        name: "fact1".into(),
        pass,
        summary: format!(
            "P[bit {} of H = x_{k} = {}] = {:.12} (error ≤ {:.3e})",
            3 * k + 3,
            u8::from(x),
            r.value,
            r.error_bound
        ),
        details: json!({
            "k": k,
            "set": set.to_string(),
            "truncation": m,
            "x": x,
            "result": r,
            "exactNumeratorBits": r.exact.as_ref().map(|e| e.numer.bits()),
        }),
    })
}

/// Family lengths not above `max_n`.
pub fn family_lengths_upto(family: UnaryFamily, max_n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    for i in 1.. {
        let k = family.lengths(i).pop().expect("i ≥ 1");
        match k.to_u128() {
            Some(k) if k <= max_n => out.push(k),
            _ => break,
        }
    }
    out
}

pub fn scan_family(family: UnaryFamily, max_n: u128, seed: u64) -> Result<ScanReport, CliError> {
    let mut rng = SeededBits::new(seed);
    let set = SetSpec::all();
    match family {
        UnaryFamily::Ulog => scan_tape_instants(&build_ulog_machine(&set), max_n, &mut rng),
        UnaryFamily::Up4ca => scan_counter_instants(&build_p4ca(&set), max_n, &mut rng),
    }
    .map_err(engine)
}

pub fn boundaries(family: UnaryFamily, max_n: u128, seed: u64) -> Result<Check, CliError> {
    let report = scan_family(family, max_n, seed)?;
    let expected = family_lengths_upto(family, max_n);
    let stray: Vec<u128> = report.accepting.iter().copied().filter(|n| !expected.contains(n)).collect();
    Ok(Check {
        name: "boundaries".into(),
        pass: report.boundaries == expected && stray.is_empty(),
        summary: format!("{family} boundaries up to {max_n}: {:?} (expected {expected:?})", report.boundaries),
        details: json!({
            "family": family.name(),
            "maxN": max_n,
            "boundaries": report.boundaries,
            "expected": expected,
            "acceptingOffFamily": stray,
            "scanned": report.scanned,
        }),
    })
}

pub fn minsky(machines: u64, steps: u64, seed: u64) -> Result<Check, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("steps must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for i in 0..machines {
        let r = minsky_lockstep(seed + i, SetSpec::finite([1, 3]), steps).map_err(engine)?;
        let ok = r.mismatches.is_empty() && r.steps_checked == steps;
        pass &= ok;
        rows.push(json!({"seed": seed + i, "stepsChecked": r.steps_checked, "mismatches": r.mismatches}));
    }
    Ok(Check {
        name: "minsky".into(),
        pass,
        summary: format!("{machines} synthetic 4-counter machines, {steps} simulated steps each"),
        details: json!({ "machines": rows }),
    })
}

fn corrupt<R: BitSource + ?Sized>(w: &mut Vec<u8>, rng: &mut R) {
    let i = draw_below(rng, w.len() as u64) as usize;
    match draw_below(rng, 3) {
        0 => {
            w.remove(i);
        }
        1 => w.insert(i, b"0124"[draw_below(rng, 4) as usize]),
        _ => w[i] = b"0124"[draw_below(rng, 4) as usize],
    }
}

/// Scaled LOGLOG words: chains for `s = 1..=max_s` in turn, every other one
/// with a random edit.
pub fn scaled_inputs(count: usize, max_s: u64, seed: u64) -> Vec<Vec<u8>> {
    let cfg = LoglogConfig::scaled();
    let mut rng = SeededBits::new(seed);
    (0..count)
        .map(|j| {
            let mut w = loglog_word(1 + j as u64 % max_s, &cfg).expect("small chain");
            if j % 2 == 1 {
                corrupt(&mut w, &mut rng);
            }
            w
        })
        .collect()
}

pub fn equal_time(inputs: usize, seeds: u64, c: u32, max_s: u64, seed: u64) -> Result<Check, CliError> {
    let cfg = LoglogConfig::scaled().with_c(c);
    let m = build_loglog_equaltime(&SetSpec::all(), &cfg);
    let mut differing = Vec::new();
    let mut steps = Vec::new();
    for (j, w) in scaled_inputs(inputs, max_s, seed).iter().enumerate() {
        let input = Input::word(w);
        let mut first = None;
        for s in 0..seeds {
            let out = run_tape_machine(&m, &input, &mut SeededBits::new(s), &Limits::default()).map_err(engine)?;
            let key = (out.total_steps, out.wait_schedule);
            match &first {
                None => first = Some(key),
                Some(f) if *f != key => differing.push(json!({"input": j, "seed": s})),
                Some(_) => {}
            }
        }
        steps.push(first.map(|f| f.0).unwrap_or(0));
    }
    Ok(Check {
        name: "equal-time".into(),
        pass: differing.is_empty(),
        summary: format!("{inputs} scaled inputs x {seeds} seeds, c = {c}: {} differing", differing.len()),
        details: json!({ "c": c, "totalSteps": steps, "differing": differing }),
    })
}

/// Overlap of two score intervals.
pub fn intervals_overlap(a: &EstimateReport, b: &EstimateReport) -> bool {
    a.ci_low <= b.ci_high && b.ci_low <= a.ci_high
}

pub struct PaddingParams {
    pub s: u64,
    pub c: u32,
    pub set: SetSpec,
    pub trials: u64,
    pub mutations: u64,
    pub probe_seeds: u64,
    pub seed: u64,
}

pub fn padding(p: &PaddingParams) -> Result<Check, CliError> {
    let cfg = LoglogConfig::scaled().with_c(p.c);
    let one_way = build_loglog_equaltime(&p.set, &cfg);
    let w = loglog_word(p.s, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let limits = Limits::default();
    let padded = pad_input(&one_way, &w, &limits).map_err(|e| CliError::Runtime(e.to_string()))?;
    let realtime = pad_to_realtime(one_way.clone());

    let win = Input::word(&w);
    let pin = Input::word(&padded);
    let direct = estimate_with(|rng| run_tape_machine(&one_way, &win, rng, &limits), p.trials, p.seed, 0.99, 4);
    let through = estimate_with(|rng| run_tape_machine(&realtime, &pin, rng, &limits), p.trials, p.seed + 1, 0.99, 4);
    let agree = intervals_overlap(&direct, &through);
    let mut realtime_ok = through.verdict_counts.errors == 0;

    let threes: Vec<usize> = (0..padded.len()).filter(|&i| padded[i] == PAD).collect();
    let mut rng = SeededBits::new(p.seed ^ 0x3333);
    let mut escaped = Vec::new();
    for j in 0..p.mutations {
        let mut m = padded.clone();
        let what = if j % 2 == 0 && !threes.is_empty() {
            let i = threes[draw_below(&mut rng, threes.len() as u64) as usize];
            m.remove(i);
            format!("removed 3 at {i}")
        } else {
            let i = draw_below(&mut rng, padded.len() as u64 + 1) as usize;
            m.insert(i, PAD);
            format!("inserted 3 at {i}")
        };
        let input = Input::word(&m);
        for s in 0..p.probe_seeds {
            let out = run_tape_machine(&realtime, &input, &mut SeededBits::new(s), &limits).map_err(engine)?;
            realtime_ok &= out.total_steps == m.len() as u128 + 2;
            if out.verdict != Verdict::Rejected {
                escaped.push(format!("{what}, seed {s}"));
            }
        }
    }
    Ok(Check {
        name: "padding".into(),
        pass: agree && escaped.is_empty() && realtime_ok,
        summary: format!(
            "s = {}: one-way {:.3} [{:.3}, {:.3}], padded {:.3} [{:.3}, {:.3}]; {} of {} mutations escaped",
            p.s,
            direct.point_estimate,
            direct.ci_low,
            direct.ci_high,
            through.point_estimate,
            through.ci_low,
            through.ci_high,
            escaped.len(),
            p.mutations
        ),
        details: json!({
            "word": String::from_utf8_lossy(&w),
            "paddedLength": padded.len(),
            "oneWay": direct,
            "padded": through,
            "intervalsOverlap": agree,
            "realtimeSteps": realtime_ok,
            "escapedMutations": escaped,
        }),
    })
}

/// `max p2(l, a, b)` over differences `1..=2^n`, the second way of computing `p3`.
pub fn p3_by_differences(l: u64, n: u32) -> u64 {
    let primes = primes_up_to(l.next_power_of_two());
    (1..=1u64 << n)
        .map(|d| primes.iter().filter(|&&q| d % q == 0).count() as u64)
        .max()
        .unwrap_or(0)
}

pub struct FingerprintParams {
    pub l: u64,
    pub n: u32,
    pub samples: u64,
    pub bit_len: u32,
    pub attempts: u64,
    pub seed: u64,
}

pub fn fingerprint(p: &FingerprintParams) -> Result<Check, CliError> {
    let usage = |e: rtpm::analysis::AnalysisError| CliError::Usage(e.to_string());
    let example = p2(4, 10, 2);
    let mut p3_rows = Vec::new();
    let mut p3_ok = true;
    for n in 1..=6u32 {
        let (a, b) = (p3_exact(p.l, n).map_err(usage)?, p3_by_differences(p.l, n));
        p3_ok &= a == b;
        p3_rows.push(json!({"n": n, "exact": a, "byDifferences": b}));
    }
    let mut rng = SeededBits::new(p.seed);
    let sampled = fingerprint_stats(p.l, p.n, p.samples, &mut rng).map_err(usage)?;
    let attempts = prime_attempt_stats(p.bit_len, p.attempts, &mut rng).map_err(usage)?;
    let ratio = attempts.mean / attempts.predicted;
    let attempts_ok = (1.0 / 3.0..=3.0).contains(&ratio);
    Ok(Check {
        name: "fingerprint".into(),
        pass: example == 1 && p3_ok && attempts_ok,
        summary: format!(
            "P2(4,10,2) = {example}; P3 agrees for n ≤ 6: {p3_ok}; mean attempts at {} bits {:.2} vs {:.2}",
            p.bit_len, attempts.mean, attempts.predicted
        ),
        details: json!({
            "p2Example": example,
            "p3": p3_rows,
            "sampled": sampled,
            "attempts": attempts,
            "attemptRatio": ratio,
        }),
    })
}

/// Head position every `every` steps and the boundary instants of one ULOG run.
pub fn ulog_skeleton(n: u64, seed: u64, every: u128) -> Result<(Vec<i64>, Vec<u128>, u128), CliError> {
    let m = build_ulog_machine(&SetSpec::finite([1]));
    let input = Input::Unary(BigUint::from(n));
    let mut run = rtpm::machine::tape::TapeRun::new(&m, &input);
    let mut heads = Vec::new();
    let mut bounds = Vec::new();
    let out = run
        .run_observed(&mut SeededBits::new(seed), &Limits::default(), |r| {
            if r.config.steps % every == 0 {
                heads.push(r.config.tape.head());
            }
            if r.phase_tag().is_some_and(|t| t.boundary) {
                bounds.push(r.config.steps);
            }
        })
        .map_err(engine)?;
    Ok((heads, bounds, out.total_steps))
}
