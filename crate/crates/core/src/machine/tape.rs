//! Tape machines: one work tape, unbounded in both directions.

use std::fmt;

use super::random::BitSource;
use super::weights::{check_weights, resolve, DrawCounts, Outcomes, Weight};
use super::{
    EngineError, HeadMove, Input, InputMove, InputSymbol, Limits, Mode, OracleError, PhaseTag,
    RunOutcome, Verdict,
};
use crate::coin::Coin;

pub type TapeSymbol = u32;
pub const BLANK: TapeSymbol = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapeAction<S> {
    pub next: S,
    pub write: TapeSymbol,
    pub head: HeadMove,
    pub input: InputMove,
}

impl<S> TapeAction<S> {
    /// Realtime-style action: the input head advances.
    pub fn go(next: S, write: TapeSymbol, head: HeadMove) -> Self {
        TapeAction {
            next,
            write,
            head,
            input: InputMove::Advance,
        }
    }

    /// One-way wait: the input head stays on its symbol.
    pub fn wait(next: S, write: TapeSymbol, head: HeadMove) -> Self {
        TapeAction {
            next,
            write,
            head,
            input: InputMove::Stay,
        }
    }
}

/// A probabilistic Turing machine given by a transition oracle.
pub trait TapeProgram {
    type State: Clone + PartialEq + fmt::Debug;

    fn mode(&self) -> Mode;
    fn coins(&self) -> &[Coin];
    fn initial(&self) -> Self::State;
    /// `Some(true)` for the accepting state, `Some(false)` for the rejecting one.
    fn halted(&self, state: &Self::State) -> Option<bool>;
    fn transitions(
        &self,
        state: &Self::State,
        input: InputSymbol,
        scanned: TapeSymbol,
        out: &mut Outcomes<TapeAction<Self::State>>,
    ) -> Result<(), OracleError>;

    fn phase_tag(&self, _state: &Self::State, _scanned: TapeSymbol) -> Option<PhaseTag> {
        None
    }

    /// Input alphabet without the end-markers.
    fn input_alphabet(&self) -> Vec<u8>;

    /// The full state set, when it is small enough to list.
    fn states(&self) -> Option<Vec<Self::State>> {
        None
    }

    /// The full tape alphabet, blank included, when it is small enough to list.
    fn tape_alphabet(&self) -> Option<Vec<TapeSymbol>> {
        None
    }
}

/// Two-sided tape stored densely around the visited window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tape {
    cells: Vec<TapeSymbol>,
    /// Index in `cells` of tape cell 0.
    origin: i64,
    head: i64,
    lo: i64,
    hi: i64,
}

impl Default for Tape {
    fn default() -> Self {
        Tape {
            cells: vec![BLANK; 16],
            origin: 4,
            head: 0,
            lo: 0,
            hi: 0,
        }
    }
}

impl Tape {
    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn get(&self, pos: i64) -> TapeSymbol {
        let i = pos + self.origin;
        if i >= 0 && (i as usize) < self.cells.len() {
            self.cells[i as usize]
        } else {
            BLANK
        }
    }

    #[inline]
    pub fn read(&self) -> TapeSymbol {
        self.get(self.head)
    }

    fn write(&mut self, sym: TapeSymbol) {
        let mut i = self.head + self.origin;
        if i < 0 || i as usize >= self.cells.len() {
            if sym == BLANK {
                return;
            }
            if i < 0 {
                let grow = (self.cells.len() as i64).max(-i);
                let mut cells = vec![BLANK; grow as usize];
                cells.extend_from_slice(&self.cells);
                self.cells = cells;
                self.origin += grow;
                i += grow;
            } else {
                let need = (i as usize + 1).max(self.cells.len() * 2);
                self.cells.resize(need, BLANK);
            }
        }
        self.cells[i as usize] = sym;
    }

    fn shift(&mut self, m: HeadMove) {
        self.head += m.delta();
        self.lo = self.lo.min(self.head);
        self.hi = self.hi.max(self.head);
    }

    /// Distinct cells the head has been on.
    pub fn cells_touched(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }

    /// Leftmost and rightmost visited positions.
    pub fn visited(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapeConfig<S> {
    pub state: S,
    pub tape: Tape,
    /// Framed input position under the input head.
    pub input_pos: u128,
    pub steps: u128,
    pub waits: Vec<u64>,
}

impl<S> TapeConfig<S> {
    pub fn new(state: S) -> Self {
        TapeConfig {
            state,
            tape: Tape::default(),
            input_pos: 0,
            steps: 0,
            waits: Vec::new(),
        }
    }
}

/// Applies exactly one transition on `sym`.
pub fn step_once<P: TapeProgram, R: BitSource + ?Sized>(
    prog: &P,
    config: &mut TapeConfig<P::State>,
    sym: InputSymbol,
    rng: &mut R,
    draws: &mut DrawCounts,
) -> Result<(), EngineError> {
    if prog.halted(&config.state).is_some() {
        return Err(EngineError::Halted);
    }
    let mut outs: Outcomes<TapeAction<P::State>> = Outcomes::new();
    prog.transitions(&config.state, sym, config.tape.read(), &mut outs)?;
    let step = config.steps;
    check_outcomes(prog, &outs, step)?;
    let pick = resolve(&outs, prog.coins(), rng, draws)?;
    let action = outs.swap_remove(pick).action;
    config.tape.write(action.write);
    config.tape.shift(action.head);
    match action.input {
        InputMove::Advance => config.input_pos += 1,
        InputMove::Stay => {
            let pos = config.input_pos as usize;
            if config.waits.len() <= pos {
                config.waits.resize(pos + 1, 0);
            }
            config.waits[pos] += 1;
        }
    }
    config.state = action.next;
    config.steps += 1;
    Ok(())
}

fn check_outcomes<P: TapeProgram>(
    prog: &P,
    outs: &Outcomes<TapeAction<P::State>>,
    step: u128,
) -> Result<(), EngineError> {
    if outs.len() == 1 && outs[0].weight.is_one() {
        // Fast path for deterministic steps.
    } else {
        let ws: smallvec::SmallVec<[&Weight; 4]> = outs.iter().map(|b| &b.weight).collect();
        check_weights(&ws).map_err(|violation| EngineError::MalformedWeights { step, violation })?;
    }
    if prog.mode() == Mode::Realtime && outs.iter().any(|b| b.action.input == InputMove::Stay) {
        return Err(EngineError::RealtimeViolation { step });
    }
    Ok(())
}

/// A run in progress: program, input and the live configuration.
pub struct TapeRun<'a, P: TapeProgram> {
    pub prog: &'a P,
    pub input: &'a Input,
    pub config: TapeConfig<P::State>,
    pub draws: DrawCounts,
}

impl<'a, P: TapeProgram> TapeRun<'a, P> {
    pub fn new(prog: &'a P, input: &'a Input) -> Self {
        TapeRun {
            prog,
            input,
            config: TapeConfig::new(prog.initial()),
            draws: DrawCounts::default(),
        }
    }

    pub fn halted(&self) -> Option<bool> {
        self.prog.halted(&self.config.state)
    }

    pub fn phase_tag(&self) -> Option<PhaseTag> {
        self.prog
            .phase_tag(&self.config.state, self.config.tape.read())
    }

    pub fn current_symbol(&self) -> Option<InputSymbol> {
        self.input.symbol(self.config.input_pos)
    }

    pub fn step<R: BitSource + ?Sized>(&mut self, rng: &mut R) -> Result<(), EngineError> {
        let sym = self
            .current_symbol()
            .ok_or(EngineError::RanOffInput { step: self.config.steps })?;
        step_once(self.prog, &mut self.config, sym, rng, &mut self.draws)
    }

    /// Would reading `sym` now halt for certain? `Some(verdict)` if every
    /// outcome enters the same halting state.
    pub fn probe(&self, sym: InputSymbol) -> Result<Option<bool>, EngineError> {
        let mut outs = Outcomes::new();
        self.prog
            .transitions(&self.config.state, sym, self.config.tape.read(), &mut outs)?;
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
            max_cells: self.config.tape.cells_touched(),
            max_counter: 0,
            wait_schedule: match self.prog.mode() {
                Mode::OneWay => self.config.waits.clone(),
                Mode::Realtime => Vec::new(),
            },
            fair_bits: self.draws.fair_bits,
            coin_flips: self.draws.coin_flips,
        }
    }

    /// Runs to a halt or a limit, calling `observe` after every step.
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
            if self.config.steps >= limits.max_steps
                || self.config.tape.cells_touched() > limits.max_cells
            {
                return Ok(self.outcome(Verdict::ResourceLimit));
            }
            self.step(rng)?;
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

/// One computation path of `prog` on `input`.
pub fn run_tape_machine<P: TapeProgram, R: BitSource + ?Sized>(
    prog: &P,
    input: &Input,
    rng: &mut R,
    limits: &Limits,
) -> Result<RunOutcome, EngineError> {
    TapeRun::new(prog, input).run(rng, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::random::{ScriptedBits, SeededBits};
    use crate::machine::weights::Branch;
    use crate::machine::UNARY;

    /// Table-free toy machine used by several engine tests.
    struct Toy {
        kind: ToyKind,
        mode: Mode,
    }

    #[derive(Clone, Copy)]
    enum ToyKind {
        AcceptOnEnd,
        RejectOnLeftEnd,
        WriteRight,
        FairAccept,
        WaitsOnce,
        Broken,
    }

    #[derive(Clone, Debug, PartialEq)]
    enum S {
        Run,
        Waited,
        Acc,
        Rej,
    }

    impl TapeProgram for Toy {
        type State = S;

        fn mode(&self) -> Mode {
            self.mode
        }

        fn coins(&self) -> &[Coin] {
            &[]
        }

        fn initial(&self) -> S {
            S::Run
        }

        fn halted(&self, s: &S) -> Option<bool> {
            match s {
                S::Acc => Some(true),
                S::Rej => Some(false),
                _ => None,
            }
        }

        fn transitions(
            &self,
            s: &S,
            input: InputSymbol,
            scanned: TapeSymbol,
            out: &mut Outcomes<TapeAction<S>>,
        ) -> Result<(), OracleError> {
            let stay = TapeAction::go(s.clone(), scanned, HeadMove::Stay);
            match self.kind {
                ToyKind::AcceptOnEnd => out.push(Branch::certain(match input {
                    InputSymbol::RightEnd => TapeAction::go(S::Acc, scanned, HeadMove::Stay),
                    _ => stay,
                })),
                ToyKind::RejectOnLeftEnd => {
                    out.push(Branch::certain(TapeAction::go(S::Rej, 0, HeadMove::Stay)))
                }
                ToyKind::WriteRight => out.push(Branch::certain(match input {
                    InputSymbol::RightEnd => TapeAction::go(S::Acc, 0, HeadMove::Stay),
                    _ => TapeAction::go(S::Run, 7, HeadMove::Right),
                })),
                ToyKind::FairAccept => match input {
                    InputSymbol::RightEnd => {
                        out.push(Branch::new(Weight::half(false), TapeAction::go(S::Rej, 0, HeadMove::Stay)));
                        out.push(Branch::new(Weight::half(true), TapeAction::go(S::Acc, 0, HeadMove::Stay)));
                    }
                    _ => out.push(Branch::certain(stay)),
                },
                ToyKind::WaitsOnce => out.push(Branch::certain(match (s, input) {
                    (_, InputSymbol::RightEnd) => TapeAction::go(S::Acc, 0, HeadMove::Stay),
                    (S::Run, InputSymbol::Sym(_)) => TapeAction::wait(S::Waited, 0, HeadMove::Stay),
                    _ => TapeAction::go(S::Run, 0, HeadMove::Stay),
                })),
                ToyKind::Broken => {
                    out.push(Branch::new(Weight::half(true), stay));
                }
            }
            Ok(())
        }

        fn input_alphabet(&self) -> Vec<u8> {
            vec![UNARY]
        }
    }

    fn toy(kind: ToyKind) -> Toy {
        Toy {
            kind,
            mode: Mode::Realtime,
        }
    }

    #[test]
    fn accepts_on_end_in_n_plus_two() {
        let out = run_tape_machine(
            &toy(ToyKind::AcceptOnEnd),
            &Input::word("aa"),
            &mut SeededBits::new(1),
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(out.verdict, Verdict::Accepted);
        assert_eq!(out.total_steps, 4);
    }

    #[test]
    fn early_reject_takes_one_step() {
        for n in [0, 1, 50] {
            let out = run_tape_machine(
                &toy(ToyKind::RejectOnLeftEnd),
                &Input::unary(n),
                &mut SeededBits::new(1),
                &Limits::default(),
            )
            .unwrap();
            assert_eq!(out.verdict, Verdict::Rejected);
            assert_eq!(out.total_steps, 1);
        }
    }

    #[test]
    fn write_and_move_right() {
        let prog = toy(ToyKind::WriteRight);
        let mut config = TapeConfig::new(S::Run);
        let mut draws = DrawCounts::default();
        step_once(&prog, &mut config, InputSymbol::LeftEnd, &mut SeededBits::new(0), &mut draws)
            .unwrap();
        assert_eq!(config.tape.head(), 1);
        assert_eq!(config.tape.get(0), 7);
        assert_eq!(config.steps, 1);
        assert_eq!(config.tape.cells_touched(), 2);
    }

    #[test]
    fn forced_fair_bit() {
        let prog = toy(ToyKind::FairAccept);
        let input = Input::unary(2);
        let out = run_tape_machine(&prog, &input, &mut ScriptedBits::constant(false), &Limits::default())
            .unwrap();
        assert_eq!(out.verdict, Verdict::Rejected);
        let out = run_tape_machine(&prog, &input, &mut ScriptedBits::constant(true), &Limits::default())
            .unwrap();
        assert_eq!(out.verdict, Verdict::Accepted);
        assert_eq!(out.fair_bits, 1);
    }

    #[test]
    fn malformed_weights_are_reported() {
        let err = run_tape_machine(&toy(ToyKind::Broken), &Input::unary(1), &mut SeededBits::new(0), &Limits::default())
            .unwrap_err();
        assert!(matches!(err, EngineError::MalformedWeights { step: 0, .. }));
    }

    #[test]
    fn realtime_violation_and_one_way_waits() {
        let err = run_tape_machine(&toy(ToyKind::WaitsOnce), &Input::unary(2), &mut SeededBits::new(0), &Limits::default())
            .unwrap_err();
        assert_eq!(err, EngineError::RealtimeViolation { step: 1 });
        let prog = Toy {
            kind: ToyKind::WaitsOnce,
            mode: Mode::OneWay,
        };
        let out = run_tape_machine(&prog, &Input::unary(2), &mut SeededBits::new(0), &Limits::default())
            .unwrap();
        assert_eq!(out.verdict, Verdict::Accepted);
        assert_eq!(out.wait_schedule, vec![0, 1, 1]);
        assert_eq!(out.total_steps, 6);
    }

    #[test]
    fn step_limit_gives_resource_limit() {
        let out = run_tape_machine(
            &toy(ToyKind::AcceptOnEnd),
            &Input::unary(100),
            &mut SeededBits::new(0),
            &Limits::steps(10),
        )
        .unwrap();
        assert_eq!(out.verdict, Verdict::ResourceLimit);
        assert_eq!(out.total_steps, 10);
    }

    #[test]
    fn tape_grows_left() {
        let mut t = Tape::default();
        for _ in 0..40 {
            t.shift(HeadMove::Left);
            t.write(3);
        }
        assert_eq!(t.get(-40), 3);
        assert_eq!(t.get(0), BLANK);
        assert_eq!(t.cells_touched(), 41);
    }
}
