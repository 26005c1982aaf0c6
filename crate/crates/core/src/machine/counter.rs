//! Realtime counter automata on unary inputs.
//!
//! Programs may declare a deterministic cycle for the current state. When the
//! engine is allowed to accelerate, it executes one pass of the cycle for real,
//! checks it against the declaration, and then applies as many further passes
//! arithmetically as the zero tests along the cycle allow.

use std::fmt;

use smallvec::SmallVec;

use super::random::BitSource;
use super::weights::{check_weights, resolve, DrawCounts, Outcomes, Weight};
use super::{
    EngineError, Input, InputSymbol, Limits, Mode, OracleError, PhaseTag, RunOutcome, Verdict,
};
use crate::coin::Coin;

pub type Delta = SmallVec<[i8; 4]>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterAction<S> {
    pub next: S,
    pub delta: Delta,
}

impl<S> CounterAction<S> {
    pub fn new(next: S, delta: &[i8]) -> Self {
        CounterAction {
            next,
            delta: Delta::from_slice(delta),
        }
    }
}

/// A deterministic loop the machine is about to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    /// Counter changes of each step of one pass.
    pub deltas: Vec<Delta>,
    /// Counters whose zero status the transitions inside the cycle read.
    pub watched: SmallVec<[bool; 4]>,
    /// Upper bound on passes, if the state itself limits them.
    pub max_passes: Option<u128>,
}

/// A realtime probabilistic automaton with `k` counters.
pub trait CounterProgram {
    type State: Clone + PartialEq + fmt::Debug;

    fn counters(&self) -> usize;
    fn coins(&self) -> &[Coin];
    fn initial(&self) -> Self::State;
    fn halted(&self, state: &Self::State) -> Option<bool>;
    /// `zero[i]` is the status of counter `i`.
    fn transitions(
        &self,
        state: &Self::State,
        input: InputSymbol,
        zero: &[bool],
        out: &mut Outcomes<CounterAction<Self::State>>,
    ) -> Result<(), OracleError>;

    fn phase_tag(&self, _state: &Self::State, _zero: &[bool]) -> Option<PhaseTag> {
        None
    }

    fn input_alphabet(&self) -> Vec<u8> {
        vec![super::UNARY]
    }

    fn states(&self) -> Option<Vec<Self::State>> {
        None
    }

    /// A deterministic cycle starting in `state` on unary symbols, if any.
    fn cycle(&self, _state: &Self::State) -> Option<Cycle> {
        None
    }

    /// The state reached after `passes` passes of the declared cycle.
    fn skip(&self, state: &Self::State, _passes: u128) -> Self::State {
        state.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterConfig<S> {
    pub state: S,
    pub counters: Vec<u128>,
    pub input_pos: u128,
    pub steps: u128,
}

impl<S> CounterConfig<S> {
    pub fn new(state: S, k: usize) -> Self {
        CounterConfig {
            state,
            counters: vec![0; k],
            input_pos: 0,
            steps: 0,
        }
    }

    pub fn zero_status(&self) -> SmallVec<[bool; 4]> {
        self.counters.iter().map(|&c| c == 0).collect()
    }
}

fn apply_delta(counters: &mut [u128], delta: &[i8], step: u128) -> Result<(), EngineError> {
    for (i, (c, &d)) in counters.iter_mut().zip(delta).enumerate() {
        *c = match d {
            0 => *c,
            1 => c.checked_add(1).ok_or(EngineError::CounterOverflow { step })?,
            -1 => c
                .checked_sub(1)
                .ok_or(EngineError::NegativeCounter { step, counter: i })?,
            _ => return Err(EngineError::Oracle(OracleError::Invalid(format!("delta {d}")))),
        };
    }
    Ok(())
}

/// Applies exactly one transition on `sym`.
pub fn step_once<P: CounterProgram, R: BitSource + ?Sized>(
    prog: &P,
    config: &mut CounterConfig<P::State>,
    sym: InputSymbol,
    rng: &mut R,
    draws: &mut DrawCounts,
) -> Result<(), EngineError> {
    if prog.halted(&config.state).is_some() {
        return Err(EngineError::Halted);
    }
    let zero = config.zero_status();
    let mut outs: Outcomes<CounterAction<P::State>> = Outcomes::new();
    prog.transitions(&config.state, sym, &zero, &mut outs)?;
    let step = config.steps;
    if !(outs.len() == 1 && outs[0].weight.is_one()) {
        let ws: SmallVec<[&Weight; 4]> = outs.iter().map(|b| &b.weight).collect();
        check_weights(&ws).map_err(|violation| EngineError::MalformedWeights { step, violation })?;
    }
    let pick = resolve(&outs, prog.coins(), rng, draws)?;
    let action = outs.swap_remove(pick).action;
    if action.delta.len() != config.counters.len() {
        return Err(EngineError::Oracle(OracleError::Invalid(format!(
            "delta of length {} for {} counters",
            action.delta.len(),
            config.counters.len()
        ))));
    }
    apply_delta(&mut config.counters, &action.delta, step)?;
    config.state = action.next;
    config.steps += 1;
    config.input_pos += 1;
    Ok(())
}

/// A run in progress on `a^n`, or on an endless stream of `a` when `len` is `None`.
pub struct CounterRun<'a, P: CounterProgram> {
    pub prog: &'a P,
    pub len: Option<u128>,
    pub config: CounterConfig<P::State>,
    pub draws: DrawCounts,
    pub max_counter: u128,
    accelerate: bool,
}

impl<'a, P: CounterProgram> CounterRun<'a, P> {
    pub fn new(prog: &'a P, len: Option<u128>) -> Self {
        CounterRun {
            prog,
            len,
            config: CounterConfig::new(prog.initial(), prog.counters()),
            draws: DrawCounts::default(),
            max_counter: 0,
            accelerate: false,
        }
    }

    pub fn on_input(prog: &'a P, input: &Input) -> Self {
        Self::new(prog, input.len())
    }

    /// Allow skipping over declared cycles.
    pub fn accelerated(mut self) -> Self {
        self.accelerate = true;
        self
    }

    pub fn halted(&self) -> Option<bool> {
        self.prog.halted(&self.config.state)
    }

    pub fn phase_tag(&self) -> Option<PhaseTag> {
        self.prog
            .phase_tag(&self.config.state, &self.config.zero_status())
    }

    pub fn symbol_at(&self, pos: u128) -> Option<InputSymbol> {
        match (pos, self.len) {
            (0, _) => Some(InputSymbol::LeftEnd),
            (_, None) => Some(InputSymbol::Sym(super::UNARY)),
            (p, Some(n)) if p <= n => Some(InputSymbol::Sym(super::UNARY)),
            (p, Some(n)) if p == n + 1 => Some(InputSymbol::RightEnd),
            _ => None,
        }
    }

    fn track_max(&mut self) {
        for &c in &self.config.counters {
            self.max_counter = self.max_counter.max(c);
        }
    }

    pub fn step<R: BitSource + ?Sized>(&mut self, rng: &mut R) -> Result<(), EngineError> {
        let sym = self
            .symbol_at(self.config.input_pos)
            .ok_or(EngineError::RanOffInput { step: self.config.steps })?;
        step_once(self.prog, &mut self.config, sym, rng, &mut self.draws)?;
        self.track_max();
        Ok(())
    }

    /// Unary symbols left before `$`.
    fn unary_left(&self) -> u128 {
        match self.len {
            None => u128::MAX,
            Some(n) if self.config.input_pos >= 1 => (n + 1).saturating_sub(self.config.input_pos),
            Some(_) => 0,
        }
    }

    /// Passes of `cycle` that can be applied arithmetically from the current
    /// counters without changing any zero test and without going negative.
    fn safe_passes(&self, cycle: &Cycle) -> u128 {
        let len = cycle.deltas.len() as u128;
        let mut passes = cycle.max_passes.unwrap_or(u128::MAX);
        passes = passes.min(self.unary_left() / len);
        for (i, &v) in self.config.counters.iter().enumerate() {
            let v = v as i128;
            let mut prefix = 0i128;
            let mut min_before = 0i128;
            let mut min_after = 0i128;
            let mut zero_read = false;
            for d in &cycle.deltas {
                min_before = min_before.min(prefix);
                zero_read |= v + prefix == 0;
                prefix += i128::from(d[i]);
                min_after = min_after.min(prefix);
            }
            let total = prefix;
            if cycle.watched[i] && zero_read && total != 0 {
                passes = passes.min(1);
            }
            if total < 0 {
                let drop = -total;
                // v + (p-1)·total + min_after ≥ 0 for the last pass p.
                let room = v + min_after;
                if room < 0 {
                    return 0;
                }
                let mut limit = (room / drop + 1) as u128;
                if cycle.watched[i] && !zero_read {
                    // Reads must stay nonzero: v + (p-1)·total + min_before ≥ 1.
                    let room = v + min_before - 1;
                    limit = limit.min(if room < 0 { 0 } else { (room / drop + 1) as u128 });
                }
                passes = passes.min(limit);
            }
        }
        passes
    }

    fn try_accelerate<R: BitSource + ?Sized>(
        &mut self,
        rng: &mut R,
        max_steps: u128,
    ) -> Result<bool, EngineError> {
        if !self.accelerate || self.config.input_pos == 0 {
            return Ok(false);
        }
        let Some(cycle) = self.prog.cycle(&self.config.state) else {
            return Ok(false);
        };
        let len = cycle.deltas.len() as u128;
        let room = max_steps.saturating_sub(self.config.steps) / len;
        let passes = self.safe_passes(&cycle).min(room);
        if passes < 2 {
            return Ok(false);
        }
        // One pass for real, checked against the declaration.
        let start = self.config.clone();
        let expected = self.prog.skip(&start.state, 1);
        for (l, d) in cycle.deltas.iter().enumerate() {
            let before = self.config.counters.clone();
            let draws = self.draws;
            self.step(rng)?;
            let changed: Vec<i128> = self
                .config
                .counters
                .iter()
                .zip(&before)
                .map(|(&a, &b)| a as i128 - b as i128)
                .collect();
            let declared: Vec<i128> = d.iter().map(|&x| i128::from(x)).collect();
            if changed != declared || draws != self.draws {
                return Err(EngineError::CycleMismatch(format!(
                    "step {l} of cycle from {:?}",
                    start.state
                )));
            }
        }
        if self.config.state != expected {
            return Err(EngineError::CycleMismatch(format!(
                "cycle from {:?} ended in {:?}, declared {expected:?}",
                start.state, self.config.state
            )));
        }
        let rest = passes - 1;
        let mut total: SmallVec<[i128; 4]> = SmallVec::from_elem(0, self.config.counters.len());
        for d in &cycle.deltas {
            for (t, &x) in total.iter_mut().zip(d.iter()) {
                *t += i128::from(x);
            }
        }
        for (i, c) in self.config.counters.iter_mut().enumerate() {
            let mut peak = *c as i128;
            let mut run = 0i128;
            for d in &cycle.deltas {
                run += i128::from(d[i]);
                let first = *c as i128 + run;
                let last = first + (rest as i128 - 1) * total[i];
                peak = peak.max(first).max(last);
            }
            let next = *c as i128 + rest as i128 * total[i];
            self.max_counter = self.max_counter.max(peak.max(next) as u128);
            *c = next as u128;
        }
        self.config.state = self.prog.skip(&start.state, passes);
        self.config.steps += rest * len;
        self.config.input_pos += rest * len;
        Ok(true)
    }

    pub fn probe(&self, sym: InputSymbol) -> Result<Option<bool>, EngineError> {
        let mut outs = Outcomes::new();
        self.prog.transitions(
            &self.config.state,
            sym,
            &self.config.zero_status(),
            &mut outs,
        )?;
        let mut verdict = None;
        for b in &outs {
            match (self.prog.halted(&b.action.next), verdict) {
                (None, _) => return Ok(None),
                (Some(v), None) => verdict = Some(v),
                (Some(v), Some(w)) if v != w => return Ok(None),
                _ => {}
            }
        }
        Ok(verdict)
    }

    pub fn outcome(&self, verdict: Verdict) -> RunOutcome {
        RunOutcome {
            verdict,
            total_steps: self.config.steps,
            input_consumed: self.config.input_pos,
            max_cells: 0,
            max_counter: self.max_counter,
            wait_schedule: Vec::new(),
            fair_bits: self.draws.fair_bits,
            coin_flips: self.draws.coin_flips,
        }
    }

    /// Runs to a halt or a limit, calling `observe` after every step or skip.
    pub fn run_observed<R, F>(
        &mut self,
        rng: &mut R,
        limits: &Limits,
        mut observe: F,
    ) -> Result<RunOutcome, EngineError>
    where
        R: BitSource + ?Sized,
        F: FnMut(&Self),
    {
        loop {
            if let Some(v) = self.halted() {
                return Ok(self.outcome(Verdict::from_accept(v)));
            }
            if self.config.steps >= limits.max_steps {
                return Ok(self.outcome(Verdict::ResourceLimit));
            }
            if !self.try_accelerate(rng, limits.max_steps)? {
                self.step(rng)?;
            }
            observe(self);
        }
    }

    pub fn run<R: BitSource + ?Sized>(
        &mut self,
        rng: &mut R,
        limits: &Limits,
    ) -> Result<RunOutcome, EngineError> {
        self.run_observed(rng, limits, |_| {})
    }
}

/// One computation path on the unary input of the given length.
pub fn run_counter_machine<P: CounterProgram, R: BitSource + ?Sized>(
    prog: &P,
    input_len: &num_bigint::BigUint,
    rng: &mut R,
    limits: &Limits,
) -> Result<RunOutcome, EngineError> {
    use num_traits::ToPrimitive;
    CounterRun::new(prog, input_len.to_u128()).run(rng, limits)
}

/// Counter machines are always realtime.
pub const COUNTER_MODE: Mode = Mode::Realtime;
