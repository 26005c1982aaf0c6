//! Step-exact execution of probabilistic tape machines and counter automata.
//!
//! Input is framed as `¢ w $`; position 0 is `¢`, positions `1..=n` hold `w`
//! and position `n + 1` is `$`. Unary inputs are given by their length only.

pub mod counter;
pub mod instants;
pub mod random;
pub mod tape;
pub mod weights;
pub mod wellformed;

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coin::CoinError;
pub use weights::{Branch, CoinId, DrawCounts, Factor, Outcomes, Weight, WeightViolation};

/// The symbol of unary inputs.
pub const UNARY: u8 = b'a';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InputSymbol {
    LeftEnd,
    Sym(u8),
    RightEnd,
}

impl fmt::Display for InputSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSymbol::LeftEnd => f.write_str("¢"),
            InputSymbol::Sym(c) => write!(f, "{}", *c as char),
            InputSymbol::RightEnd => f.write_str("$"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Realtime,
    OneWay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeadMove {
    Left,
    Stay,
    Right,
}

impl HeadMove {
    pub fn delta(self) -> i64 {
        match self {
            HeadMove::Left => -1,
            HeadMove::Stay => 0,
            HeadMove::Right => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputMove {
    Stay,
    Advance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accepted,
    Rejected,
    ResourceLimit,
}

impl Verdict {
    pub fn from_accept(accept: bool) -> Self {
        if accept {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        }
    }
}

/// Builder-supplied label of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseTag {
    /// Current iteration (or block) number, 0 before the first one starts.
    pub iteration: u64,
    /// Set when an iteration has just been completed, i.e. `$` may accept here.
    pub boundary: bool,
}

/// Machine input: a word, or a unary word `a^n` given by `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Word(Vec<u8>),
    Unary(BigUint),
}

impl Input {
    pub fn unary(n: u64) -> Self {
        Input::Unary(BigUint::from(n))
    }

    pub fn word(w: impl AsRef<[u8]>) -> Self {
        Input::Word(w.as_ref().to_vec())
    }

    /// Length of `w`, or `None` if it does not fit in a `u128`.
    pub fn len(&self) -> Option<u128> {
        match self {
            Input::Word(w) => Some(w.len() as u128),
            Input::Unary(n) => n.to_u128(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Symbol at framed position `pos`, `None` past the right end-marker.
    pub fn symbol(&self, pos: u128) -> Option<InputSymbol> {
        if pos == 0 {
            return Some(InputSymbol::LeftEnd);
        }
        match self {
            Input::Word(w) => {
                let i = (pos - 1) as usize;
                match i.cmp(&w.len()) {
                    std::cmp::Ordering::Less => Some(InputSymbol::Sym(w[i])),
                    std::cmp::Ordering::Equal => Some(InputSymbol::RightEnd),
                    std::cmp::Ordering::Greater => None,
                }
            }
            Input::Unary(n) => match n.to_u128() {
                Some(n) if pos <= n => Some(InputSymbol::Sym(UNARY)),
                Some(n) if pos == n + 1 => Some(InputSymbol::RightEnd),
                Some(_) => None,
                // Too long to ever reach the end in a run.
                None => Some(InputSymbol::Sym(UNARY)),
            },
        }
    }
}

/// Caps on a single run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_steps: u128,
    pub max_cells: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 1 << 40,
            max_cells: 1 << 24,
        }
    }
}

impl Limits {
    pub fn steps(max_steps: u128) -> Self {
        Limits {
            max_steps,
            ..Limits::default()
        }
    }
}

/// Verdict and accounting of one computation path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub total_steps: u128,
    /// Framed input positions moved past (`¢` included).
    pub input_consumed: u128,
    pub max_cells: u64,
    pub max_counter: u128,
    /// Stay steps per framed input position (one-way machines only).
    pub wait_schedule: Vec<u64>,
    pub fair_bits: u64,
    pub coin_flips: u64,
}

/// Failures reported by transition oracles themselves.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("simulated step {step} needs more real steps than its budget {budget}")]
    BudgetOverflow { step: u64, budget: u128 },
    #[error("outside the horizon the machine was built for: {0}")]
    Capacity(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("malformed weights at step {step}: {violation}")]
    MalformedWeights {
        step: u128,
        violation: WeightViolation,
    },
    #[error("realtime machine kept its input head still at step {step}")]
    RealtimeViolation { step: u128 },
    #[error("counter {counter} decremented at zero at step {step}")]
    NegativeCounter { step: u128, counter: usize },
    #[error("counter overflow at step {step}")]
    CounterOverflow { step: u128 },
    #[error("machine moved past the right end-marker without halting at step {step}")]
    RanOffInput { step: u128 },
    #[error("step requested on a halted configuration")]
    Halted,
    #[error("declared cycle does not match the transitions: {0}")]
    CycleMismatch(String),
    #[error(transparent)]
    Coin(#[from] CoinError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
