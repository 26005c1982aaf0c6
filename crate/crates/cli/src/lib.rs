//! Batch front end for the `rtpm` machines.

pub mod config;
pub mod machines;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use rtpm::analysis::{acceptance_oracle_unary, estimate_with, EstimateReport};
use rtpm::languages::{classify_unary, loglog_generate, loglog_validate, Membership, UnaryFamily};
use rtpm::machine::random::SeededBits;
use rtpm::machine::{Limits, RunOutcome};

use config::{ExperimentArgs, ExperimentConfig, Format, Geometry, MachineConfig};
use machines::{loglog_config, parse_set, prepare_input, Built, Prepared};
use verify::Check;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// A verification found the contract broken.
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn other<E: std::fmt::Display>(e: E) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 2,
            CliError::Usage(_) | CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rtpm", version, about = "Probabilistic machines driven by a set-encoded coin")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Language {
    Ulog,
    Up4ca,
    Loglog,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum UnaryMachine {
    Ulog,
    P4ca,
}

impl UnaryMachine {
    fn family(self) -> UnaryFamily {
        match self {
            UnaryMachine::Ulog => UnaryFamily::Ulog,
            UnaryMachine::P4ca => UnaryFamily::Up4ca,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Member lengths, membership and generated words.
    Lang {
        #[arg(value_enum)]
        language: Language,
        /// Print the first lengths (unary) or admissible block lengths (LOGLOG).
        #[arg(long)]
        max_i: Option<u32>,
        /// Classify a unary length or a LOGLOG word.
        #[arg(long)]
        classify: Option<String>,
        /// Write the LOGLOG chain ending at bin(s).
        #[arg(long)]
        gen_s: Option<u64>,
        /// Write the shortest LOGLOG member with parameter k.
        #[arg(long)]
        gen_k: Option<u32>,
        #[arg(long, default_value = "preset:all")]
        set: String,
        #[arg(long, value_enum, default_value = "scaled")]
        geometry: Geometry,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a machine and describe it.
    Build {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Check every transition triple.
        #[arg(long)]
        check_wellformed: bool,
    },
    /// One computation path.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Seeded Monte-Carlo acceptance estimate.
    Estimate {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Check a fact or contract; exit code 2 if it fails.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
        /// Write the check as JSON.
        #[arg(long, global = true)]
        output: Option<PathBuf>,
    },
    /// Tabulate JSON reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Probability that the head count shows x_k.
    Fact1 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        set: String,
        /// Truncation of p_I in bits; 6k+40 by default.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Iteration boundaries against the family lengths.
    Boundaries {
        #[arg(long, value_enum)]
        machine: UnaryMachine,
        #[arg(long)]
        max_n: u128,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Two-counter simulation in lockstep with the direct run.
    Minsky {
        #[arg(long, default_value_t = 20)]
        machines: u64,
        #[arg(long, default_value_t = 50)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Identical step counts and wait schedules across seeds.
    EqualTime {
        #[arg(long, default_value_t = 50)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        seeds: u64,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, default_value_t = 9)]
        max_s: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Padded realtime machine against the equal-time machine.
    Padding {
        #[arg(long, default_value_t = 8)]
        s: u64,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, default_value = "preset:all")]
        set: String,
        #[arg(long, default_value_t = 400)]
        trials: u64,
        #[arg(long, default_value_t = 100)]
        mutations: u64,
        #[arg(long, default_value_t = 2)]
        probe_seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prime counts behind the fingerprint check.
    Fingerprint {
        #[arg(long, default_value_t = 64)]
        l: u64,
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 16)]
        bit_len: u32,
        #[arg(long, default_value_t = 2000)]
        attempts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Lang {
            language,
            max_i,
            classify,
            gen_s,
            gen_k,
            set,
            geometry,
            output,
        } => lang(language, max_i, classify, gen_s.map(Gen::S).or(gen_k.map(Gen::K)), &set, geometry, output),
        Command::Build { exp, check_wellformed } => build(&ExperimentConfig::resolve(&exp)?, check_wellformed),
        Command::Run { exp } => run_once(&ExperimentConfig::resolve(&exp)?),
        Command::Estimate { exp } => {
            let cfg = ExperimentConfig::resolve(&exp)?;
            let report = estimate(&cfg)?;
            emit_report(&cfg, &report)
        }
        Command::Verify { what, output } => {
            let check = run_verify(what)?;
            println!("{}", check.summary);
            println!("{}", if check.pass { "PASS" } else { "FAIL" });
            if let Some(p) = output {
                write_to(Some(&p), report::canonical_json(&check).as_bytes())?;
            }
            if check.pass {
                Ok(())
            } else {
                Err(CliError::Violation(format!("{} check failed", check.name)))
            }
        }
        Command::Report { reports, format, output } => tabulate(&reports, format, output.as_deref()),
    }
}

fn write_to(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(CliError::other)
        }
    }
}

enum Gen {
    S(u64),
    K(u32),
}

fn lang(
    language: Language,
    max_i: Option<u32>,
    classify: Option<String>,
    gen: Option<Gen>,
    set: &str,
    geometry: Geometry,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let set = parse_set(set)?;
    let family = match language {
        Language::Ulog => Some(UnaryFamily::Ulog),
        Language::Up4ca => Some(UnaryFamily::Up4ca),
        Language::Loglog => None,
    };
    let lcfg = loglog_config(&MachineConfig {
        geometry,
        ..MachineConfig::default()
    });
    let text = match (family, classify, gen) {
        (Some(_), _, Some(_)) => return Err(CliError::Usage("--gen-s/--gen-k need loglog".into())),
        (Some(f), Some(n), None) => {
            let n: BigUint = n.trim().parse().map_err(|_| CliError::Usage(format!("`{n}` is not a length")))?;
            match classify_unary(&n, f, &set) {
                Membership::InFamilyAndInI(i) => format!("member i={i}, i in I"),
                Membership::InFamilyOnly(i) => format!("family length i={i}, i not in I"),
                Membership::NotInFamily => "not a family length".to_string(),
            }
        }
        (Some(f), None, None) => {
            let lengths: Vec<String> = f.lengths(max_i.unwrap_or(3)).iter().map(|k| k.to_string()).collect();
            lengths.join(" ")
        }
        (None, Some(w), None) => match loglog_validate(w.trim().as_bytes(), &lcfg) {
            Ok(k) if set.contains(u64::from(k)) => format!("member k={k}, k in I"),
            Ok(k) => format!("chain with k={k}, k not in I"),
            Err(r) => format!("rejected: {:?} at {}", r.reason, r.position),
        },
        (None, None, Some(g)) => {
            let s = match g {
                Gen::S(s) => BigUint::from(s),
                Gen::K(k) => {
                    let m = lcfg.length_for(k);
                    let e = num_traits::ToPrimitive::to_u32(&(m - 1u32))
                        .ok_or_else(|| CliError::Usage("member too long".into()))?;
                    BigUint::from(1u8) << e
                }
            };
            if s == BigUint::from(0u8) {
                return Err(CliError::Usage("s must be positive".into()));
            }
            let mut buf = Vec::new();
            loglog_generate(&s, &lcfg, &mut buf).map_err(|e| CliError::Usage(e.to_string()))?;
            buf.push(b'\n');
            return write_to(output.as_deref(), &buf);
        }
        (None, None, None) => {
            let lengths: Vec<String> = (1..=max_i.unwrap_or(3)).map(|k| lcfg.length_for(k).to_string()).collect();
            lengths.join(" ")
        }
        (None, Some(_), Some(_)) => return Err(CliError::Usage("give either --classify or a generator".into())),
    };
    write_to(output.as_deref(), format!("{text}\n").as_bytes())
}

fn build(cfg: &ExperimentConfig, check: bool) -> Result<(), CliError> {
    let built = Built::new(&cfg.machine)?;
    let mut desc = json!({ "machine": cfg.machine, "description": built.describe() });
    let mut violated = None;
    if check {
        let v = built
            .check_wellformed()
            .ok_or_else(|| CliError::Usage(format!("{:?} does not list its states", cfg.machine.name)))?;
        desc["violations"] = json!(v.iter().map(|v| v.to_string()).collect::<Vec<_>>());
        desc["wellformed"] = json!(v.is_empty());
        if !v.is_empty() {
            violated = Some(v.len());
        }
    }
    write_to(cfg.output.as_deref(), format!("{}\n", report::canonical_json(&desc)).as_bytes())?;
    match violated {
        Some(n) => Err(CliError::Violation(format!("{n} malformed transition triples"))),
        None => Ok(()),
    }
}

fn limits(cfg: &ExperimentConfig) -> Limits {
    Limits::steps(u128::from(cfg.max_steps))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    input: String,
    seed: u64,
    outcome: RunOutcome,
    final_state: Option<String>,
}

fn run_once(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let built = Built::new(&cfg.machine)?;
    let input = prepare_input(cfg, &built)?;
    let (outcome, final_state) = built
        .run(&input, &mut SeededBits::new(cfg.master_seed), &limits(cfg))
        .map_err(CliError::other)?;
    let r = RunReport {
        config: cfg,
        input: input.describe(),
        seed: cfg.master_seed,
        outcome,
        final_state,
    };
    write_to(cfg.output.as_deref(), format!("{}\n", report::canonical_json(&r)).as_bytes())
}

/// The estimate report as a JSON value, with `timestamp` and `durationMs`.
pub fn estimate(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let built = Built::new(&cfg.machine)?;
    let input = prepare_input(cfg, &built)?;
    let start = Instant::now();
    let lim = limits(cfg);
    let r: EstimateReport = estimate_with(
        |rng| built.run(&input, rng, &lim).map(|o| o.0),
        cfg.trials,
        cfg.master_seed,
        cfg.level,
        cfg.workers.max(1),
    );
    let mut v = json!({
        "config": cfg,
        "input": input.describe(),
        "trials": r.trials,
        "level": r.level,
        "verdictCounts": r.verdict_counts,
        "pointEstimate": r.point_estimate,
        "ciLow": r.ci_low,
        "ciHigh": r.ci_high,
        "seed": r.master_seed,
    });
    if let (Some(f), Prepared::Unary(n)) = (built.family(), &input) {
        let set = parse_set(&cfg.machine.set)?;
        if let Ok(o) = acceptance_oracle_unary(f, &set, n) {
            let pass = o.value + o.error_bound >= r.ci_low && o.value - o.error_bound <= r.ci_high;
            v["oracleValue"] = json!(o.value);
            v["oracleErrorBound"] = json!(o.error_bound);
            v["pass"] = json!(pass);
        }
    }
    v["durationMs"] = json!(start.elapsed().as_millis() as u64);
    v["timestamp"] = json!(report::timestamp());
    Ok(v)
}

fn emit_report(cfg: &ExperimentConfig, v: &Value) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => write_to(cfg.output.as_deref(), format!("{}\n", report::canonical_json(v)).as_bytes()),
        Format::Csv => {
            let mut buf = Vec::new();
            report::write_csv(&[("estimate".into(), v.clone())], &mut buf)?;
            write_to(cfg.output.as_deref(), &buf)
        }
    }
}

fn run_verify(what: VerifyCommand) -> Result<Check, CliError> {
    match what {
        VerifyCommand::Fact1 { k, set, m } => verify::fact1(k, &parse_set(&set)?, m),
        VerifyCommand::Boundaries { machine, max_n, seed } => verify::boundaries(machine.family(), max_n, seed),
        VerifyCommand::Minsky { machines, steps, seed } => verify::minsky(machines, steps, seed),
        VerifyCommand::EqualTime {
            inputs,
            seeds,
            c,
            max_s,
            seed,
        } => verify::equal_time(inputs, seeds, c, max_s, seed),
        VerifyCommand::Padding {
            s,
            c,
            set,
            trials,
            mutations,
            probe_seeds,
            seed,
        } => verify::padding(&verify::PaddingParams {
            s,
            c,
            set: parse_set(&set)?,
            trials,
            mutations,
            probe_seeds,
            seed,
        }),
        VerifyCommand::Fingerprint {
            l,
            n,
            samples,
            bit_len,
            attempts,
            seed,
        } => verify::fingerprint(&verify::FingerprintParams {
            l,
            n,
            samples,
            bit_len,
            attempts,
            seed,
        }),
    }
}

fn tabulate(paths: &[PathBuf], format: Format, output: Option<&std::path::Path>) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        reports.push((p.display().to_string(), v));
    }
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            report::write_csv(&reports, &mut buf)?;
            write_to(output, &buf)
        }
        Format::Json => {
            let all: Vec<Value> = reports.into_iter().map(|(_, v)| v).collect();
            write_to(output, format!("{}\n", report::canonical_json(&all)).as_bytes())
        }
    }
}

