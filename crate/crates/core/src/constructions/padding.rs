//! Realtime padding of an equal-time one-way machine.
//!
//! Every wait of the one-way machine on a symbol becomes a `3` right after
//! that symbol in the padded word, so the realtime machine reads one symbol
//! per step and takes exactly as many steps as the machine it wraps. On a
//! word that is not padded correctly it still reads up to `$` before
//! rejecting.

use thiserror::Error;

use crate::coin::Coin;
use crate::machine::random::SeededBits;
use crate::machine::tape::{TapeAction, TapeProgram, TapeRun, TapeSymbol};
use crate::machine::{
    Branch, EngineError, HeadMove, Input, InputMove, InputSymbol, Limits, Mode, OracleError, Outcomes,
    Verdict,
};

pub const PAD: u8 = b'3';

/// Seeds whose runs must agree for a word to be paddable.
const PROBE_SEEDS: [u64; 2] = [0x5eed_0001, 0x5eed_0002];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PadState<S> {
    /// `waiting` is the symbol the wrapped machine is still on, if it waited
    /// on the last step; the next symbol read must then be a `3`.
    Run { inner: S, waiting: Option<InputSymbol> },
    /// The verdict is known (a `3` was missing or extra, or the wrapped
    /// machine halted early); the rest of the input is read off.
    Done(bool),
    Halt(bool),
}

#[derive(Clone, Debug)]
pub struct Padded<P> {
    pub inner: P,
}

pub fn pad_to_realtime<P: TapeProgram>(inner: P) -> Padded<P> {
    assert_eq!(inner.mode(), Mode::OneWay);
    assert!(!inner.input_alphabet().contains(&PAD));
    Padded { inner }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PadError {
    #[error("wait schedules differ between seeds: {first} and {second} steps")]
    NotEqualTime { first: u128, second: u128 },
    #[error("no halt within the limits")]
    Unfinished,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `w` with a `3` after each symbol for every wait the machine makes on it.
pub fn pad_input<P: TapeProgram>(prog: &P, w: &[u8], limits: &Limits) -> Result<Vec<u8>, PadError> {
    let input = Input::word(w);
    let mut runs = Vec::new();
    for seed in PROBE_SEEDS {
        let out = TapeRun::new(prog, &input).run(&mut SeededBits::new(seed), limits)?;
        if out.verdict == Verdict::ResourceLimit {
            return Err(PadError::Unfinished);
        }
        runs.push(out);
    }
    if runs[0].total_steps != runs[1].total_steps || runs[0].wait_schedule != runs[1].wait_schedule {
        return Err(PadError::NotEqualTime {
            first: runs[0].total_steps,
            second: runs[1].total_steps,
        });
    }
    let waits = &runs[0].wait_schedule;
    let mut out = Vec::with_capacity(w.len());
    for (i, &c) in w.iter().enumerate() {
        out.push(c);
        let n = waits.get(i + 1).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(PAD, n as usize));
    }
    Ok(out)
}

/// Drops the padding.
pub fn unpad(w: &[u8]) -> Vec<u8> {
    w.iter().copied().filter(|&c| c != PAD).collect()
}

impl<P: TapeProgram> TapeProgram for Padded<P> {
    type State = PadState<P::State>;

    fn mode(&self) -> Mode {
        Mode::Realtime
    }

    fn coins(&self) -> &[Coin] {
        self.inner.coins()
    }

    fn initial(&self) -> Self::State {
        PadState::Run {
            inner: self.inner.initial(),
            waiting: None,
        }
    }

    fn halted(&self, state: &Self::State) -> Option<bool> {
        match state {
            PadState::Halt(v) => Some(*v),
            _ => None,
        }
    }

    fn transitions(
        &self,
        state: &Self::State,
        input: InputSymbol,
        scanned: TapeSymbol,
        out: &mut Outcomes<TapeAction<Self::State>>,
    ) -> Result<(), OracleError> {
        let finish = |v| {
            let next = if input == InputSymbol::RightEnd { PadState::Halt(v) } else { PadState::Done(v) };
            Branch::certain(TapeAction::go(next, scanned, HeadMove::Stay))
        };
        let (inner, waiting) = match state {
            PadState::Run { inner, waiting } => (inner, waiting),
            PadState::Done(v) | PadState::Halt(v) => {
                out.push(finish(*v));
                return Ok(());
            }
        };
        if let Some(v) = self.inner.halted(inner) {
            out.push(finish(v));
            return Ok(());
        }
        let sym = match waiting {
            None => input,
            Some(s) if input == InputSymbol::Sym(PAD) => *s,
            Some(_) => {
                out.push(finish(false));
                return Ok(());
            }
        };
        let mut inner_out = Outcomes::new();
        self.inner.transitions(inner, sym, scanned, &mut inner_out)?;
        for b in inner_out {
            let a = b.action;
            let next = match self.inner.halted(&a.next) {
                Some(v) if input == InputSymbol::RightEnd => PadState::Halt(v),
                Some(v) => PadState::Done(v),
                // Nothing is left to read.
                None if input == InputSymbol::RightEnd => PadState::Halt(false),
                None => PadState::Run {
                    inner: a.next,
                    waiting: (a.input == InputMove::Stay).then_some(sym),
                },
            };
            out.push(Branch::new(b.weight, TapeAction::go(next, a.write, a.head)));
        }
        Ok(())
    }

    fn input_alphabet(&self) -> Vec<u8> {
        let mut a = self.inner.input_alphabet();
        a.push(PAD);
        a
    }
}
