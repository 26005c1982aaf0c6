//! The realtime tape machine for `ULOG(I)`.
//!
//! Iteration `j` keeps `#H#T#` on cells `0..=9j+5`: `H` is a `3j+3`-cell head
//! counter with its most significant bit on cell 1, `T` a `6j`-cell toss
//! counter with its least significant bit on cell `9j+4`.
//!
//! One round trip takes `2(9j+5)` steps. Going left it increments `T`, tosses
//! the coin on the middle `#` and adds the outcome to `H`; going right it only
//! walks back. When `T` overflows the pass is the last one of the iteration:
//! it clears `H` while reading it, keeps its leading bit and stops on cell 0.
//! The next iteration's initialization is a single right sweep of `9j+6`
//! steps that moves the middle `#` three cells and the right `#` nine cells
//! to the right, so the head path never depends on the coin.

use crate::coin::{Coin, SetSpec};
use crate::machine::tape::{TapeAction, TapeProgram, TapeSymbol, BLANK};
use crate::machine::{
    Branch, HeadMove, InputSymbol, Mode, OracleError, Outcomes, PhaseTag, Weight, UNARY,
};

pub const ZERO: TapeSymbol = 1;
pub const ONE: TapeSymbol = 2;
pub const HASH: TapeSymbol = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UlogState {
    /// Reads `¢`.
    Start,
    /// Writes cell `t` of `#000000#000000#`.
    Init1(u8),
    /// Initialization sweep up to the old middle `#`.
    InitHead,
    /// `n` more zeros before the new middle `#`.
    InitMid(u8),
    /// Initialization sweep up to the old right `#`.
    InitToss,
    /// `n` more zeros before the new right `#`.
    InitEnd(u8),
    /// Left over the toss counter, adding `carry`.
    Tosses { carry: bool },
    /// Left over the head counter, adding `carry`. On the last pass the
    /// counter is cleared and `top` holds the bit just computed, so on cell 0
    /// it is the decision bit and the iteration is complete.
    Heads { carry: bool, last: bool, top: bool },
    /// Right over the head counter.
    BackHeads,
    /// Right over the toss counter.
    BackTosses,
    Accept,
    Reject,
}

/// Where things are during iteration `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UlogLayout {
    pub iteration: u32,
}

impl UlogLayout {
    pub fn new(iteration: u32) -> Self {
        UlogLayout { iteration }
    }

    /// Cells of the three `#`.
    pub fn separators(&self) -> [i64; 3] {
        let j = i64::from(self.iteration);
        [0, 3 * j + 4, 9 * j + 5]
    }

    /// Cells of the head counter, most significant first.
    pub fn head_cells(&self) -> std::ops::RangeInclusive<i64> {
        let j = i64::from(self.iteration);
        1..=3 * j + 3
    }

    /// Cells of the toss counter, most significant first.
    pub fn toss_cells(&self) -> std::ops::RangeInclusive<i64> {
        let j = i64::from(self.iteration);
        3 * j + 5..=9 * j + 4
    }

    /// Input symbols consumed by the iteration.
    pub fn steps(&self) -> u128 {
        let j = u128::from(self.iteration);
        (1u128 << (6 * j)) * 2 * (9 * j + 5)
    }

    /// Reads a binary counter off `cells` of a tape given by `get`.
    pub fn read_counter(
        cells: std::ops::RangeInclusive<i64>,
        get: impl Fn(i64) -> TapeSymbol,
    ) -> Option<u128> {
        let mut v = 0u128;
        for c in cells {
            v = v.checked_mul(2)?;
            match get(c) {
                ZERO => {}
                ONE => v += 1,
                _ => return None,
            }
        }
        Some(v)
    }
}

#[derive(Clone, Debug)]
pub struct UlogMachine {
    coins: [Coin; 1],
}

pub fn build_ulog_machine(set: &SetSpec) -> UlogMachine {
    UlogMachine {
        coins: [Coin::new(set.clone())],
    }
}

impl UlogMachine {
    pub fn set(&self) -> &SetSpec {
        self.coins[0].set()
    }
}

impl TapeProgram for UlogMachine {
    type State = UlogState;

    fn mode(&self) -> Mode {
        Mode::Realtime
    }

    fn coins(&self) -> &[Coin] {
        &self.coins
    }

    fn initial(&self) -> UlogState {
        UlogState::Start
    }

    fn halted(&self, state: &UlogState) -> Option<bool> {
        match state {
            UlogState::Accept => Some(true),
            UlogState::Reject => Some(false),
            _ => None,
        }
    }

    fn transitions(
        &self,
        state: &UlogState,
        input: InputSymbol,
        scanned: TapeSymbol,
        out: &mut Outcomes<TapeAction<UlogState>>,
    ) -> Result<(), OracleError> {
        use HeadMove::{Left, Right, Stay};
        use UlogState::*;
        let go = |next, write, head| Branch::certain(TapeAction::go(next, write, head));
        let reject = || go(Reject, scanned, Stay);
        let bit = |b: bool| if b { ONE } else { ZERO };

        let branch = match (input, *state) {
            (InputSymbol::LeftEnd, Start) => go(Init1(0), BLANK, Stay),
            (InputSymbol::RightEnd, Heads { last: true, top, .. }) if scanned == HASH => {
                go(if top { Accept } else { Reject }, HASH, Stay)
            }
            (InputSymbol::Sym(UNARY), s) => match (s, scanned) {
                (Init1(14), _) => go(Tosses { carry: true }, HASH, Left),
                (Init1(t), _) => go(Init1(t + 1), if t == 0 || t == 7 { HASH } else { ZERO }, Right),
                (InitHead, ZERO) => go(InitHead, ZERO, Right),
                (InitHead, HASH) => go(InitMid(2), ZERO, Right),
                (InitMid(0), ZERO) => go(InitToss, HASH, Right),
                (InitMid(n), ZERO) if n > 0 => go(InitMid(n - 1), ZERO, Right),
                (InitToss, ZERO) => go(InitToss, ZERO, Right),
                (InitToss, HASH) => go(InitEnd(8), ZERO, Right),
                (InitEnd(0), BLANK) => go(Tosses { carry: true }, HASH, Left),
                (InitEnd(n), BLANK | ZERO) if n > 0 => go(InitEnd(n - 1), ZERO, Right),
                (Tosses { carry }, ZERO | ONE) => {
                    let b = scanned == ONE;
                    go(Tosses { carry: b && carry }, bit(b != carry), Left)
                }
                (Tosses { carry: last }, HASH) => {
                    let toss = |heads: bool| {
                        TapeAction::go(Heads { carry: heads, last, top: false }, HASH, Left)
                    };
                    out.push(Branch::new(Weight::heads(0), toss(true)));
                    out.push(Branch::new(Weight::tails(0), toss(false)));
                    return Ok(());
                }
                (Heads { carry, last, .. }, ZERO | ONE) => {
                    let b = scanned == ONE;
                    let sum = b != carry;
                    let write = if last { ZERO } else { bit(sum) };
                    go(Heads { carry: b && carry, last, top: sum }, write, Left)
                }
                (Heads { last: true, .. }, HASH) => go(InitHead, HASH, Right),
                (Heads { last: false, .. }, HASH) => go(BackHeads, HASH, Right),
                (BackHeads, ZERO | ONE) => go(BackHeads, scanned, Right),
                (BackHeads, HASH) => go(BackTosses, HASH, Right),
                (BackTosses, ZERO | ONE) => go(BackTosses, scanned, Right),
                (BackTosses, HASH) => go(Tosses { carry: true }, HASH, Left),
                _ => reject(),
            },
            _ => reject(),
        };
        out.push(branch);
        Ok(())
    }

    fn phase_tag(&self, state: &UlogState, scanned: TapeSymbol) -> Option<PhaseTag> {
        Some(PhaseTag {
            iteration: 0,
            boundary: scanned == HASH && matches!(state, UlogState::Heads { last: true, .. }),
        })
    }

    fn input_alphabet(&self) -> Vec<u8> {
        vec![UNARY]
    }

    fn states(&self) -> Option<Vec<UlogState>> {
        use UlogState::*;
        let mut all = vec![Start, InitHead, InitToss, BackHeads, BackTosses, Accept, Reject];
        all.extend((0..15).map(Init1));
        all.extend((0..3).map(InitMid));
        all.extend((0..9).map(InitEnd));
        for a in [false, true] {
            all.push(Tosses { carry: a });
            for b in [false, true] {
                for c in [false, true] {
                    all.push(Heads { carry: a, last: b, top: c });
                }
            }
        }
        Some(all)
    }

    fn tape_alphabet(&self) -> Option<Vec<TapeSymbol>> {
        Some(vec![BLANK, ZERO, ONE, HASH])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::instants::scan_tape_instants;
    use crate::machine::random::{ScriptedBits, SeededBits};
    use crate::machine::tape::{run_tape_machine, TapeRun};
    use crate::machine::wellformed::{all_tape_triples, verify_tape};
    use crate::machine::{Input, Limits, Verdict};

    #[test]
    fn boundaries_of_first_two_iterations() {
        let m = build_ulog_machine(&SetSpec::finite([1]));
        let report = scan_tape_instants(&m, 200_000, &mut SeededBits::new(3)).unwrap();
        assert_eq!(report.boundaries, vec![1792, 190208]);
        assert!(report.accepting.iter().all(|n| report.boundaries.contains(n)));
    }

    #[test]
    fn wellformed_everywhere() {
        let m = build_ulog_machine(&SetSpec::all());
        let triples = all_tape_triples(&m).unwrap();
        assert!(verify_tape(&m, triples).is_empty());
    }

    #[test]
    fn non_member_rejects_in_n_plus_two() {
        let m = build_ulog_machine(&SetSpec::all());
        for seed in 0..5 {
            let out = run_tape_machine(&m, &Input::unary(1000), &mut SeededBits::new(seed), &Limits::default())
                .unwrap();
            assert_eq!(out.verdict, Verdict::Rejected);
            assert_eq!(out.total_steps, 1002);
        }
    }

    #[test]
    fn first_iteration_counts_heads() {
        // u = 0 beats the leading 1 of p, so all 64 tosses are heads and
        // H = 64 mod 64 = 0.
        let m = build_ulog_machine(&SetSpec::all());
        let input = Input::unary(1792);
        let mut run = TapeRun::new(&m, &input);
        let mut rng = ScriptedBits::constant(false);
        let out = run.run(&mut rng, &Limits::default()).unwrap();
        assert_eq!(out.coin_flips, 64);
        assert_eq!(out.total_steps, 1794);
        assert_eq!(out.max_cells, 15);
        assert_eq!(out.verdict, Verdict::Rejected);
    }

    #[test]
    fn head_counter_matches_flips_mid_iteration() {
        let m = build_ulog_machine(&SetSpec::finite([1, 2]));
        let input = Input::unary(1792 + 100_000);
        let mut run = TapeRun::new(&m, &input);
        let mut rng = SeededBits::new(11);
        let mut heads = 0u128;
        let mut flips = 0u64;
        let layout = UlogLayout::new(2);
        while run.config.steps < 1 + 1792 + 60_000 {
            let before = run.draws.coin_flips;
            let state = run.config.state;
            run.step(&mut rng).unwrap();
            if run.draws.coin_flips > before && run.config.steps > 1793 {
                flips += 1;
                if matches!(run.config.state, UlogState::Heads { carry: true, .. }) {
                    heads += 1;
                }
            }
            if matches!(state, UlogState::BackTosses)
                && matches!(run.config.state, UlogState::Tosses { .. })
                && run.config.steps > 1793
            {
                let tape = &run.config.tape;
                let h = UlogLayout::read_counter(layout.head_cells(), |c| tape.get(c)).unwrap();
                let t = UlogLayout::read_counter(layout.toss_cells(), |c| tape.get(c)).unwrap();
                assert_eq!(h, heads % (1 << 9));
                assert_eq!(t, u128::from(flips));
            }
        }
        assert!(flips > 0);
    }
}
