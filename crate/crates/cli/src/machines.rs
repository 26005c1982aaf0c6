//! Building the configured machine and its input.

use num_bigint::BigUint;
use serde_json::{json, Value};

use rtpm::coin::SetSpec;
use rtpm::constructions::{
    build_loglog_equaltime, build_loglog_oneway, build_p4ca, build_ulog_machine, pad_input, pad_to_realtime,
    LoglogMachine, P4caMachine, Padded, UlogMachine, PAD,
};
use rtpm::languages::{loglog_member, loglog_word, LoglogConfig, UnaryFamily};
use rtpm::machine::counter::{run_counter_machine, CounterProgram};
use rtpm::machine::random::BitSource;
use rtpm::machine::tape::{TapeProgram, TapeRun};
use rtpm::machine::wellformed::{all_counter_triples, all_tape_triples, verify_counter, verify_tape, Violation};
use rtpm::machine::{EngineError, Input, Limits, RunOutcome};

use crate::config::{ExperimentConfig, Geometry, MachineConfig, MachineKind};
use crate::CliError;

pub enum Built {
    Ulog(UlogMachine),
    P4ca(P4caMachine),
    Loglog(LoglogMachine),
    LoglogEqualTime(LoglogMachine),
    LoglogPadded(Padded<LoglogMachine>),
}

/// A prepared input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prepared {
    Unary(BigUint),
    Word(Vec<u8>),
}

impl Prepared {
    pub fn describe(&self) -> String {
        match self {
            Prepared::Unary(n) => format!("a^{n}"),
            Prepared::Word(w) if w.len() <= 64 => String::from_utf8_lossy(w).into_owned(),
            Prepared::Word(w) => format!("{} symbols", w.len()),
        }
    }

    /// `n` of a unary input or the word length.
    pub fn len(&self) -> BigUint {
        match self {
            Prepared::Unary(n) => n.clone(),
            Prepared::Word(w) => BigUint::from(w.len()),
        }
    }
}

pub fn parse_set(text: &str) -> Result<SetSpec, CliError> {
    text.parse().map_err(|e| CliError::Usage(format!("set `{text}`: {e}")))
}

pub fn loglog_config(m: &MachineConfig) -> LoglogConfig {
    let mut cfg = match m.geometry {
        Geometry::Scaled => LoglogConfig::scaled(),
        Geometry::Paper => LoglogConfig::paper(),
    };
    if let Some(c) = m.c {
        cfg = cfg.with_c(c);
    }
    if let Some(t) = m.min_random_check_m {
        cfg = cfg.with_min_random_check_m(t);
    }
    cfg
}

impl Built {
    pub fn new(m: &MachineConfig) -> Result<Built, CliError> {
        let set = parse_set(&m.set)?;
        let lcfg = loglog_config(m);
        Ok(match m.name {
            MachineKind::Ulog => Built::Ulog(build_ulog_machine(&set)),
            MachineKind::P4ca => Built::P4ca(build_p4ca(&set)),
            MachineKind::Loglog => Built::Loglog(build_loglog_oneway(&set, &lcfg)),
            MachineKind::LoglogEqualTime => Built::LoglogEqualTime(build_loglog_equaltime(&set, &lcfg)),
            MachineKind::LoglogPadded => Built::LoglogPadded(pad_to_realtime(build_loglog_equaltime(&set, &lcfg))),
        })
    }

    pub fn family(&self) -> Option<UnaryFamily> {
        match self {
            Built::Ulog(_) => Some(UnaryFamily::Ulog),
            Built::P4ca(_) => Some(UnaryFamily::Up4ca),
            _ => None,
        }
    }

    /// One computation path; the second value names the halting state of
    /// LOGLOG machines.
    pub fn run<R: BitSource + ?Sized>(
        &self,
        input: &Prepared,
        rng: &mut R,
        limits: &Limits,
    ) -> Result<(RunOutcome, Option<String>), EngineError> {
        fn tape<P: TapeProgram, R: BitSource + ?Sized>(
            p: &P,
            input: &Input,
            rng: &mut R,
            limits: &Limits,
        ) -> Result<(RunOutcome, P::State), EngineError> {
            let mut run = TapeRun::new(p, input);
            let out = run.run(rng, limits)?;
            Ok((out, run.config.state))
        }
        let as_input = || match input {
            Prepared::Unary(n) => Input::Unary(n.clone()),
            Prepared::Word(w) => Input::word(w),
        };
        match (self, input) {
            (Built::P4ca(m), Prepared::Unary(n)) => Ok((run_counter_machine(m, n, rng, limits)?, None)),
            (Built::P4ca(_), Prepared::Word(_)) => Err(EngineError::Oracle(rtpm::machine::OracleError::Invalid(
                "counter automata take unary inputs".into(),
            ))),
            (Built::Ulog(m), _) => Ok((tape(m, &as_input(), rng, limits)?.0, None)),
            (Built::Loglog(m) | Built::LoglogEqualTime(m), _) => {
                let (out, state) = tape(m, &as_input(), rng, limits)?;
                Ok((out, Some(format!("{state:?}"))))
            }
            (Built::LoglogPadded(m), _) => {
                let (out, state) = tape(m, &as_input(), rng, limits)?;
                Ok((out, Some(format!("{state:?}"))))
            }
        }
    }

    pub fn describe(&self) -> Value {
        fn tape<P: TapeProgram>(p: &P) -> Value {
            json!({
                "kind": "tape",
                "mode": p.mode(),
                "coins": p.coins().len(),
                "inputAlphabet": String::from_utf8_lossy(&p.input_alphabet()),
                "states": p.states().map(|s| s.len()),
                "tapeAlphabet": p.tape_alphabet().map(|g| g.len()),
            })
        }
        fn counter<P: CounterProgram>(p: &P) -> Value {
            json!({
                "kind": "counter",
                "mode": rtpm::machine::counter::COUNTER_MODE,
                "counters": p.counters(),
                "coins": p.coins().len(),
                "inputAlphabet": String::from_utf8_lossy(&p.input_alphabet()),
                "states": p.states().map(|s| s.len()),
            })
        }
        match self {
            Built::Ulog(m) => tape(m),
            Built::P4ca(m) => counter(m),
            Built::Loglog(m) | Built::LoglogEqualTime(m) => tape(m),
            Built::LoglogPadded(m) => tape(m),
        }
    }

    /// Violations over every triple, or `None` when the machine does not
    /// list its states.
    pub fn check_wellformed(&self) -> Option<Vec<Violation>> {
        match self {
            Built::Ulog(m) => Some(verify_tape(m, all_tape_triples(m)?)),
            Built::P4ca(m) => Some(verify_counter(m, all_counter_triples(m)?)),
            Built::Loglog(m) | Built::LoglogEqualTime(m) => Some(verify_tape(m, all_tape_triples(m)?)),
            Built::LoglogPadded(m) => Some(verify_tape(m, all_tape_triples(m)?)),
        }
    }

    /// Realtime machines must take exactly `n + 2` steps.
    pub fn realtime(&self) -> bool {
        matches!(self, Built::Ulog(_) | Built::P4ca(_) | Built::LoglogPadded(_))
    }
}

/// The input named by the configuration.
pub fn prepare_input(cfg: &ExperimentConfig, built: &Built) -> Result<Prepared, CliError> {
    let lcfg = loglog_config(&cfg.machine);
    let loglog = built.family().is_none();
    let word = if let Some(n) = &cfg.n {
        let n: BigUint = n
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("n = `{n}` is not a decimal integer")))?;
        if loglog {
            return Err(CliError::Usage("LOGLOG machines take words, not unary lengths".into()));
        }
        return Ok(Prepared::Unary(n));
    } else if let Some(i) = cfg.member {
        match built.family() {
            Some(f) => {
                if i == 0 {
                    return Err(CliError::Usage("member indices start at 1".into()));
                }
                return Ok(Prepared::Unary(f.lengths(i).pop().expect("i ≥ 1")));
            }
            None => loglog_member(i, &lcfg).map_err(|e| CliError::Usage(e.to_string()))?,
        }
    } else if let Some(s) = cfg.s {
        if !loglog || s == 0 {
            return Err(CliError::Usage("s needs a LOGLOG machine and s ≥ 1".into()));
        }
        loglog_word(s, &lcfg).map_err(|e| CliError::Usage(e.to_string()))?
    } else if let Some(w) = &cfg.word {
        w.trim().as_bytes().to_vec()
    } else if let Some(p) = &cfg.file {
        let text = std::fs::read(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
        text.trim_ascii().to_vec()
    } else {
        return Err(CliError::Usage("no input: give n, member, s, word or file".into()));
    };
    if !loglog {
        // Unary machines also accept a literal word of a's.
        if word.iter().all(|&c| c == rtpm::machine::UNARY) {
            return Ok(Prepared::Unary(BigUint::from(word.len())));
        }
        return Err(CliError::Usage("unary machines read only `a`".into()));
    }
    if let Built::LoglogPadded(p) = built {
        if !word.contains(&PAD) {
            let limits = Limits::steps(u128::from(cfg.max_steps));
            let padded = pad_input(&p.inner, &word, &limits).map_err(|e| CliError::Usage(format!("padding: {e}")))?;
            return Ok(Prepared::Word(padded));
        }
    }
    Ok(Prepared::Word(word))
}
