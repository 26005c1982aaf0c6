//! The realtime 4-counter automaton for `UP4CA(I)`.
//!
//! Iteration `m` tosses the coin `64^m` times, counting down `C1`. Heads move
//! one unit between `C2` and `C3`, whose sum stays `4·8^m`; the direction
//! flips whenever the source counter runs dry, so the direction after `H`
//! heads is the bit of weight `4·8^m` in `H`.
//!
//! With `T = 4·8^m` and `N = 8^(m+1)` the setup of iteration `m+1` runs
//!
//! 1. `2T` steps: `C1 += 1` every step, `C2 + C3` drained every second step,
//!    leaving `C1 = N`;
//! 2. `N` steps: `C1 -= 1`, `C2 += 1`, `C3 += 1`;
//! 3. `N²` steps: `N` loops moving `C3` to `C4` and back with `C1 += 1` each
//!    step, `C2` counting the loops, leaving `C1 = N²`;
//! 4. `4N` steps: `C2 += 1` every step, `C3 -= 1` every fourth, leaving
//!    `C2 = 4N`.
//!
//! That is `64^(m+1) + 6·8^(m+1)` steps. The first setup is a fixed 64-step
//! count.

use crate::coin::{Coin, SetSpec};
use crate::machine::counter::{CounterAction, CounterProgram};
use crate::machine::{Branch, InputSymbol, OracleError, Outcomes, PhaseTag, Weight, UNARY};

const C1: usize = 0;
const C2: usize = 1;
const C3: usize = 2;
const C4: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum P4caState {
    Start,
    /// Step `t` of the first setup.
    Init1(u8),
    /// Coin phase. `fill_c2` is the current direction: heads move a unit
    /// from `C3` to `C2` when set, from `C2` to `C3` otherwise.
    Coin { fill_c2: bool },
    /// Setup step 1; `drain` on the steps that empty `C2 + C3`.
    Spread { drain: bool },
    /// Setup step 2.
    Fill,
    /// Setup step 3, moving `C3` into `C4` or back.
    Square { into_c4: bool },
    /// Setup step 4, `phase` out of 4.
    Widen { phase: u8 },
    Accept,
    Reject,
}

/// What a state is doing, for instrumentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum P4caPhase {
    Init,
    CoinFlips { fill_c2: bool },
    Halted,
}

impl P4caState {
    pub fn phase(&self) -> P4caPhase {
        match self {
            P4caState::Coin { fill_c2 } => P4caPhase::CoinFlips { fill_c2: *fill_c2 },
            P4caState::Accept | P4caState::Reject => P4caPhase::Halted,
            _ => P4caPhase::Init,
        }
    }
}

#[derive(Clone, Debug)]
pub struct P4caMachine {
    coins: [Coin; 1],
}

pub fn build_p4ca(set: &SetSpec) -> P4caMachine {
    P4caMachine {
        coins: [Coin::new(set.clone())],
    }
}

/// The direction after switching away from an exhausted source.
fn settle(fill_c2: bool, zero: &[bool]) -> bool {
    let source = if fill_c2 { C3 } else { C2 };
    if zero[source] {
        !fill_c2
    } else {
        fill_c2
    }
}

fn delta(pairs: &[(usize, i8)]) -> [i8; 4] {
    let mut d = [0i8; 4];
    for &(i, v) in pairs {
        d[i] = v;
    }
    d
}

impl P4caMachine {
    fn coin_step(&self, fill_c2: bool, zero: &[bool], out: &mut Outcomes<CounterAction<P4caState>>) {
        let dir = settle(fill_c2, zero);
        if zero[if dir { C3 } else { C2 }] {
            // C2 + C3 is never zero while tossing.
            out.push(Branch::certain(CounterAction::new(P4caState::Reject, &[0; 4])));
            return;
        }
        let next = P4caState::Coin { fill_c2: dir };
        let (from, to) = if dir { (C3, C2) } else { (C2, C3) };
        let heads = delta(&[(C1, -1), (from, -1), (to, 1)]);
        let tails = delta(&[(C1, -1)]);
        out.push(Branch::new(Weight::heads(0), CounterAction::new(next, &heads)));
        out.push(Branch::new(Weight::tails(0), CounterAction::new(next, &tails)));
    }
}

impl CounterProgram for P4caMachine {
    type State = P4caState;

    fn counters(&self) -> usize {
        4
    }

    fn coins(&self) -> &[Coin] {
        &self.coins
    }

    fn initial(&self) -> P4caState {
        P4caState::Start
    }

    fn halted(&self, state: &P4caState) -> Option<bool> {
        match state {
            P4caState::Accept => Some(true),
            P4caState::Reject => Some(false),
            _ => None,
        }
    }

    fn transitions(
        &self,
        state: &P4caState,
        input: InputSymbol,
        zero: &[bool],
        out: &mut Outcomes<CounterAction<P4caState>>,
    ) -> Result<(), OracleError> {
        use P4caState::*;
        let go = |next, pairs: &[(usize, i8)]| {
            Branch::certain(CounterAction::new(next, &delta(pairs)))
        };
        let branch = match (input, *state) {
            (InputSymbol::LeftEnd, Start) => go(Init1(0), &[]),
            (InputSymbol::RightEnd, Coin { fill_c2 }) if zero[C1] => {
                go(if settle(fill_c2, zero) { Accept } else { Reject }, &[])
            }
            (InputSymbol::Sym(UNARY), s) => match s {
                Init1(63) => go(Coin { fill_c2: false }, &[(C1, 1)]),
                Init1(t) if t < 32 => go(Init1(t + 1), &[(C1, 1), (C2, 1)]),
                Init1(t) => go(Init1(t + 1), &[(C1, 1)]),
                Coin { fill_c2 } if !zero[C1] => {
                    self.coin_step(fill_c2, zero, out);
                    return Ok(());
                }
                Coin { .. } => go(Spread { drain: true }, &[(C1, 1)]),
                Spread { drain: true } if !zero[C2] => go(Spread { drain: false }, &[(C1, 1), (C2, -1)]),
                Spread { drain: true } if !zero[C3] => go(Spread { drain: false }, &[(C1, 1), (C3, -1)]),
                Spread { drain: false } if zero[C2] && zero[C3] && !zero[C1] => {
                    go(Fill, &[(C1, -1), (C2, 1), (C3, 1)])
                }
                Spread { drain: false } => go(Spread { drain: true }, &[(C1, 1)]),
                Fill if !zero[C1] => go(Fill, &[(C1, -1), (C2, 1), (C3, 1)]),
                Fill if !zero[C3] && !zero[C2] => {
                    go(Square { into_c4: true }, &[(C1, 1), (C2, -1), (C3, -1), (C4, 1)])
                }
                Square { into_c4 } => {
                    let (from, to) = if into_c4 { (C3, C4) } else { (C4, C3) };
                    if !zero[from] {
                        go(s, &[(C1, 1), (from, -1), (to, 1)])
                    } else if !zero[C2] && !zero[to] {
                        // Next loop, in the other direction.
                        go(Square { into_c4: !into_c4 }, &[(C1, 1), (C2, -1), (to, -1), (from, 1)])
                    } else if !into_c4 && !zero[C3] {
                        go(Widen { phase: 1 }, &[(C2, 1), (C3, -1)])
                    } else {
                        go(Reject, &[])
                    }
                }
                Widen { phase: 0 } if zero[C3] && !zero[C1] => {
                    self.coin_step(false, zero, out);
                    return Ok(());
                }
                Widen { phase: 0 } if !zero[C3] => go(Widen { phase: 1 }, &[(C2, 1), (C3, -1)]),
                Widen { phase } if phase > 0 => go(Widen { phase: (phase + 1) % 4 }, &[(C2, 1)]),
                _ => go(Reject, &[]),
            },
            _ => go(Reject, &[]),
        };
        out.push(branch);
        Ok(())
    }

    fn phase_tag(&self, state: &P4caState, zero: &[bool]) -> Option<PhaseTag> {
        Some(PhaseTag {
            iteration: 0,
            boundary: matches!(state, P4caState::Coin { .. }) && zero[C1],
        })
    }

    fn input_alphabet(&self) -> Vec<u8> {
        vec![UNARY]
    }

    fn states(&self) -> Option<Vec<P4caState>> {
        use P4caState::*;
        let mut all = vec![Start, Fill, Accept, Reject];
        all.extend((0..64).map(Init1));
        all.extend((0..4).map(|phase| Widen { phase }));
        for b in [false, true] {
            all.extend([Coin { fill_c2: b }, Spread { drain: b }, Square { into_c4: b }]);
        }
        Some(all)
    }
}
