//! Symbolic well-formedness checks over sets of queried triples.

use std::fmt;

use super::counter::{CounterAction, CounterProgram};
use super::tape::{TapeAction, TapeProgram, TapeSymbol};
use super::weights::{check_weights, Outcomes, Weight};
use super::{InputMove, InputSymbol, Mode};

/// One offending triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub triple: String,
    pub problem: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.triple, self.problem)
    }
}

fn framed(alphabet: &[u8]) -> Vec<InputSymbol> {
    let mut syms = vec![InputSymbol::LeftEnd];
    syms.extend(alphabet.iter().map(|&c| InputSymbol::Sym(c)));
    syms.push(InputSymbol::RightEnd);
    syms
}

/// Every (state, input symbol, tape symbol) triple of a finite machine, or
/// `None` when the program does not list its states or tape alphabet.
pub fn all_tape_triples<P: TapeProgram>(
    prog: &P,
) -> Option<Vec<(P::State, InputSymbol, TapeSymbol)>> {
    let states = prog.states()?;
    let gammas = prog.tape_alphabet()?;
    let inputs = framed(&prog.input_alphabet());
    let mut out = Vec::with_capacity(states.len() * gammas.len() * inputs.len());
    for s in states.iter().filter(|s| prog.halted(s).is_none()) {
        for &i in &inputs {
            for &g in &gammas {
                out.push((s.clone(), i, g));
            }
        }
    }
    Some(out)
}

/// Checks each sampled triple of a tape machine.
pub fn verify_tape<P, I>(prog: &P, triples: I) -> Vec<Violation>
where
    P: TapeProgram,
    I: IntoIterator<Item = (P::State, InputSymbol, TapeSymbol)>,
{
    let mut found = Vec::new();
    for (s, i, g) in triples {
        let triple = || format!("({s:?}, {i}, {g})");
        let mut outs: Outcomes<TapeAction<P::State>> = Outcomes::new();
        if let Err(e) = prog.transitions(&s, i, g, &mut outs) {
            found.push(Violation {
                triple: triple(),
                problem: e.to_string(),
            });
            continue;
        }
        let ws: Vec<&Weight> = outs.iter().map(|b| &b.weight).collect();
        if let Err(v) = check_weights(&ws) {
            found.push(Violation {
                triple: triple(),
                problem: v.to_string(),
            });
        }
        if prog.mode() == Mode::Realtime && outs.iter().any(|b| b.action.input == InputMove::Stay) {
            found.push(Violation {
                triple: triple(),
                problem: "realtime outcome keeps the input head still".into(),
            });
        }
    }
    found
}

/// A state, input symbol and zero-status vector.
pub type CounterTriple<S> = (S, InputSymbol, Vec<bool>);

/// Every (state, input symbol, zero-status vector) triple of a finite counter machine.
pub fn all_counter_triples<P: CounterProgram>(prog: &P) -> Option<Vec<CounterTriple<P::State>>> {
    let states = prog.states()?;
    let k = prog.counters();
    let inputs = framed(&prog.input_alphabet());
    let mut out = Vec::new();
    for s in states.iter().filter(|s| prog.halted(s).is_none()) {
        for &i in &inputs {
            for mask in 0u32..(1 << k) {
                let zero = (0..k).map(|b| mask >> b & 1 == 1).collect();
                out.push((s.clone(), i, zero));
            }
        }
    }
    Some(out)
}

/// Checks each sampled triple of a counter machine, including that no outcome
/// decrements a counter whose status is zero.
pub fn verify_counter<P, I>(prog: &P, triples: I) -> Vec<Violation>
where
    P: CounterProgram,
    I: IntoIterator<Item = (P::State, InputSymbol, Vec<bool>)>,
{
    let mut found = Vec::new();
    for (s, i, zero) in triples {
        let triple = || format!("({s:?}, {i}, {zero:?})");
        let mut outs: Outcomes<CounterAction<P::State>> = Outcomes::new();
        if let Err(e) = prog.transitions(&s, i, &zero, &mut outs) {
            found.push(Violation {
                triple: triple(),
                problem: e.to_string(),
            });
            continue;
        }
        let ws: Vec<&Weight> = outs.iter().map(|b| &b.weight).collect();
        if let Err(v) = check_weights(&ws) {
            found.push(Violation {
                triple: triple(),
                problem: v.to_string(),
            });
        }
        for b in &outs {
            let bad_len = b.action.delta.len() != zero.len();
            let below_zero = b.action.delta.iter().zip(&zero).any(|(&d, &z)| d < 0 && z);
            let too_big = b.action.delta.iter().any(|d| d.abs() > 1);
            if bad_len || below_zero || too_big {
                found.push(Violation {
                    triple: triple(),
                    problem: format!("illegal delta {:?}", b.action.delta),
                });
            }
        }
    }
    found
}
