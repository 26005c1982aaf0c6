//! One-way machines for `LOGLOG(I)`.
//!
//! The work tape has an anchor on cell 0 and numbers stored least significant
//! bit first from cell 1. Each cell is a bit set: one bit per register
//! ("track") plus flags marking how far each register currently extends.
//! Every operation is a sweep: right from the anchor over the used cells, one
//! cell further, and back. The used extent depends only on the input read so
//! far, so every sweep on a given input takes the same number of steps on
//! every computation path.
//!
//! While a block `bin(b)` is read, each digit costs one sweep that
//!
//! * increments the length counter `M`,
//! * updates `q ← 2q + digit mod r` for the one or two active fingerprint
//!   registers (the new `q - r` goes to a scratch track and is committed on
//!   the way back if `2q + digit ≥ r`),
//! * compares the digit with the expected successor digit by digit, for
//!   the pairs that are still checked deterministically.
//!
//! At a `2` the machine checks the length rule and the pair that just ended,
//! copies `M` into `M0`, grows the register widths with `|m|`, and draws the
//! prime for the pair starting with the next block. At the `4` it checks
//! that `m` is an admissible length, lays out the toss and head counters, and
//! tosses.
//!
//! The equal-time variant draws exactly `2^W` candidates for a `W`-bit prime,
//! tries every divisor below `2^Wd`, and runs every subtraction loop for
//! exactly `2^W` rounds. It never rejects on a fingerprint mismatch right away;
//! it remembers it and rejects at `$`.

use crate::coin::{Coin, SetSpec};
use crate::languages::{FailureReason, LoglogConfig};
use crate::machine::tape::{Tape, TapeAction, TapeProgram, TapeSymbol};
use crate::machine::{Branch, HeadMove, InputSymbol, Mode, OracleError, Outcomes, Weight};

/// Track bits of a work-tape cell.
pub mod track {
    pub const ANCHOR: u32 = 1 << 0;
    /// Cell is inside the used extent.
    pub const USED: u32 = 1 << 1;
    /// Extent of `|m0|`, the bit length of the previous block length.
    pub const LB: u32 = 1 << 2;
    /// Extent of `|m|·c` bits: primes, fingerprints, attempt and subtraction counters.
    pub const FA: u32 = 1 << 3;
    /// Extent of `⌈|m|/2⌉·c` bits: divisors.
    pub const FB: u32 = 1 << 4;
    /// Extent of the stored block.
    pub const FS: u32 = 1 << 5;
    /// Extent of the head counter.
    pub const FH: u32 = 1 << 6;
    /// Extent of the toss counter.
    pub const FT: u32 = 1 << 7;
    pub const M: u32 = 1 << 8;
    pub const M0: u32 = 1 << 9;
    /// Expected next block, for pairs checked digit by digit.
    pub const ST: u32 = 1 << 10;
    /// Next digit of `ST` to compare.
    pub const MK: u32 = 1 << 11;
    pub const HC: u32 = 1 << 12;
    pub const TC: u32 = 1 << 13;
    pub const AT: u32 = 1 << 14;
    pub const SC: u32 = 1 << 15;
    pub const D: u32 = 1 << 16;
    pub const H: u32 = 1 << 17;
    pub const T1: u32 = 1 << 18;
    pub const T2: u32 = 1 << 19;
    pub const R4: u32 = 1 << 20;
    pub const Q4: u32 = 1 << 21;
    pub const R5: u32 = 1 << 22;
    pub const Q5: u32 = 1 << 23;
    pub const R6: u32 = 1 << 24;
    pub const Q6: u32 = 1 << 25;
    pub const R7: u32 = 1 << 26;
    pub const Q7: u32 = 1 << 27;
}

use track::*;

#[inline]
fn has(cell: TapeSymbol, t: u32) -> bool {
    cell & t != 0
}

#[inline]
fn put(cell: &mut TapeSymbol, t: u32, v: bool) {
    if v {
        *cell |= t;
    } else {
        *cell &= !t;
    }
}

/// Prime and fingerprint of the pair starting at a block of this parity.
fn own(odd: bool) -> (u32, u32) {
    if odd {
        (R4, Q4)
    } else {
        (R6, Q6)
    }
}

/// Copy of the prime of the pair starting at a block of this parity, with the
/// fingerprint of the block after it.
fn partner(odd: bool) -> (u32, u32) {
    if odd {
        (R5, Q5)
    } else {
        (R7, Q7)
    }
}

/// Control flags that live across sweeps. `b` is the block being read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Flags {
    pub odd: bool,
    pub first: bool,
    /// Nothing of block `b` read yet.
    pub empty: bool,
    /// Block `b` is all ones so far.
    pub ones: bool,
    /// Block `b - 1` was all ones.
    pub prev_ones: bool,
    /// Pair `(b-1, b)` is checked digit by digit.
    pub check_det: bool,
    /// Pair `(b, b+1)` will be.
    pub own_det: bool,
    /// Blocks this long have been seen: all later pairs use primes.
    pub sticky: bool,
    pub det_bad: bool,
    /// The digit-by-digit marker has run off the stored block.
    pub exhausted: bool,
    /// A fingerprint mismatch was seen (equal-time variant only).
    pub doomed: bool,
    /// `|m0|` is odd.
    pub m_odd: bool,
}

impl Flags {
    fn start() -> Self {
        Flags {
            odd: true,
            first: true,
            empty: true,
            ones: true,
            prev_ones: true,
            check_det: true,
            own_det: true,
            sticky: false,
            det_bad: false,
            exhausted: false,
            doomed: false,
            m_odd: false,
        }
    }
}

/// Prime search flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Search {
    pub found: bool,
    pub composite: bool,
    /// Candidate is at least 2.
    pub big: bool,
    pub q_done: bool,
    pub h_hit: bool,
    pub reload: bool,
}

/// One sweep and its running values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Init { done: bool },
    Digit {
        d: bool,
        m_carry: bool,
        m_top: bool,
        shift_a: bool,
        shift_b: bool,
        borrow_a: bool,
        borrow_b: bool,
        /// `2q + d ≥ r` so far; after the turn, "subtract".
        ge_a: bool,
        ge_b: bool,
        place: bool,
    },
    Check {
        m_top: bool,
        carry: bool,
        eq: bool,
        eq_next: bool,
        x_carry: bool,
        eq_y: bool,
        eq_r: bool,
        y_zero: bool,
    },
    Next {
        m_top: bool,
        grow: bool,
        st_carry: bool,
        marked: bool,
        pos: u16,
        ge: bool,
    },
    Resize { fa: u8, fb: u8, lb_ok: bool },
    SearchInit,
    Draw { seen: u8, big: bool, fb: u8 },
    Load,
    Round { sc: bool, q: bool, h: bool, q_zero: bool, h_zero: bool },
    NextDivisor { carry: bool },
    NextAttempt { carry: bool },
    SearchEnd,
    Predicate { m_top: bool, ones: u8, zeros: u8, enough: bool, ok: bool },
    HeadBase { left: u8 },
    Group { seen: bool, left: u8, grouped: bool },
    Widen { ft: u8, fh: u8 },
    Toss { tc: bool, hc: bool, top: bool },
}

impl Op {
    fn digit(d: bool) -> Self {
        Op::Digit {
            d,
            m_carry: true,
            m_top: false,
            shift_a: d,
            shift_b: d,
            borrow_a: false,
            borrow_b: false,
            ge_a: true,
            ge_b: true,
            place: false,
        }
    }

    fn check() -> Self {
        Op::Check {
            m_top: false,
            carry: true,
            eq: true,
            eq_next: true,
            x_carry: true,
            eq_y: true,
            eq_r: true,
            y_zero: true,
        }
    }

    fn next() -> Self {
        Op::Next {
            m_top: false,
            grow: false,
            st_carry: true,
            marked: false,
            pos: 0,
            ge: true,
        }
    }

    fn round() -> Self {
        Op::Round {
            sc: true,
            q: true,
            h: true,
            q_zero: true,
            h_zero: true,
        }
    }

    fn group() -> Self {
        Op::Group {
            seen: false,
            left: 0,
            grouped: false,
        }
    }

    fn toss(heads: bool) -> Self {
        Op::Toss {
            tc: true,
            hc: heads,
            top: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LoglogState {
    /// Reads `¢`.
    Start,
    /// On the first symbol, before the tape is laid out.
    Boot,
    /// At the anchor, about to read the next symbol.
    Idle(Flags),
    Sweep {
        op: Op,
        back: bool,
        flags: Flags,
        search: Search,
    },
    /// Past the `4`; `top` is the decision bit.
    AtEnd { top: bool, doomed: bool },
    Accept,
    /// `None` when the decision bit was 0.
    Reject(Option<FailureReason>),
}

/// What a finished sweep leads to.
enum Then {
    Sweep(Op),
    Toss,
    Advance,
    Dispatch,
    Reject(FailureReason),
    Final(bool),
}

#[derive(Clone, Debug)]
pub struct LoglogMachine {
    pub config: LoglogConfig,
    /// The equal-time variant P'.
    pub equal_time: bool,
    coins: [Coin; 1],
}

pub fn build_loglog_oneway(set: &SetSpec, config: &LoglogConfig) -> LoglogMachine {
    LoglogMachine::new(set, config, false)
}

pub fn build_loglog_equaltime(set: &SetSpec, config: &LoglogConfig) -> LoglogMachine {
    LoglogMachine::new(set, config, true)
}

type Out = Outcomes<TapeAction<LoglogState>>;

impl LoglogMachine {
    pub fn new(set: &SetSpec, config: &LoglogConfig, equal_time: bool) -> Self {
        assert!(config.length_step >= 1 && config.c >= 1);
        assert!(config.c <= 64 && config.length_step <= 64, "widths are counted in a u8");
        LoglogMachine {
            config: config.clone(),
            equal_time,
            coins: [Coin::new(set.clone())],
        }
    }

    fn threshold_bit(&self, pos: u16) -> bool {
        (1..=64).contains(&pos) && (self.config.min_random_check_m >> (pos - 1)) & 1 == 1
    }

    fn length_failure(flags: &Flags) -> FailureReason {
        if flags.first {
            FailureReason::BadStart
        } else {
            FailureReason::BadSuccessor
        }
    }

    /// Does the op claim a blank cell past the used extent?
    fn wants(&self, op: &Op, flags: &Flags) -> bool {
        match *op {
            Op::Init { done } => !done,
            Op::Next { st_carry, .. } => flags.own_det && st_carry,
            Op::Resize { fa, fb, lb_ok } => fa > 0 || fb > 0 || !lb_ok,
            Op::HeadBase { left } => left > 0,
            Op::Widen { ft, fh } => ft > 0 || fh > 0,
            _ => false,
        }
    }

    /// Work on a used cell on the way out; `bit` is a fair bit when the op drew one.
    fn out(&self, op: &mut Op, flags: &mut Flags, s: &Search, cell: &mut TapeSymbol, bit: bool) {
        let c = *cell;
        match op {
            Op::Init { done } => {
                *cell |= FS | ST | MK;
                *done = true;
            }
            Op::Digit {
                m_carry,
                m_top,
                shift_a,
                shift_b,
                borrow_a,
                borrow_b,
                ge_a,
                ge_b,
                ..
            } => {
                if has(c, LB) || !*m_top {
                    *m_top |= !has(c, LB);
                    let m = has(c, M);
                    put(cell, M, m ^ *m_carry);
                    *m_carry &= m;
                }
                if has(c, FA) {
                    if !flags.own_det {
                        shift_sub(cell, own(flags.odd), T1, shift_a, borrow_a, ge_a);
                    }
                    if !flags.check_det {
                        shift_sub(cell, partner(!flags.odd), T2, shift_b, borrow_b, ge_b);
                    }
                }
            }
            Op::Check {
                m_top,
                carry,
                eq,
                eq_next,
                x_carry,
                eq_y,
                eq_r,
                y_zero,
            } => {
                if has(c, LB) || !*m_top {
                    *m_top |= !has(c, LB);
                    let (m, m0) = (has(c, M), has(c, M0));
                    *eq &= m == m0;
                    *eq_next &= m == (m0 ^ *carry);
                    *carry &= m0;
                }
                if !flags.check_det && has(c, FA) {
                    let (r, x) = own(!flags.odd);
                    let (_, y) = partner(!flags.odd);
                    let xb = has(c, x);
                    let x1 = xb ^ *x_carry;
                    *x_carry &= xb;
                    *eq_y &= x1 == has(c, y);
                    *eq_r &= x1 == has(c, r);
                    *y_zero &= !has(c, y);
                }
            }
            Op::Next {
                m_top,
                grow,
                st_carry,
                pos,
                ge,
                ..
            } => {
                if has(c, LB) || !*m_top {
                    let m = has(c, M);
                    put(cell, M0, m);
                    put(cell, M, false);
                    *pos += 1;
                    let t = self.threshold_bit(*pos);
                    if m != t {
                        *ge = m;
                    }
                    if !has(c, LB) {
                        *m_top = true;
                        if m {
                            *grow = true;
                            *cell |= LB;
                        }
                    }
                }
                if flags.own_det {
                    if has(c, FS) {
                        let b = has(c, ST);
                        put(cell, ST, b ^ *st_carry);
                        *st_carry &= b;
                    } else if *st_carry {
                        *cell |= FS | ST;
                        *st_carry = false;
                    }
                }
                *cell &= !MK;
                if has(c, FA) {
                    if !flags.own_det {
                        let (r, _) = own(flags.odd);
                        let (pr, pq) = partner(flags.odd);
                        put(cell, pr, has(c, r));
                        put(cell, pq, false);
                    }
                    let (r, q) = own(!flags.odd);
                    *cell &= !(r | q);
                }
            }
            Op::Resize { fa, fb, lb_ok } => {
                *lb_ok |= !has(c, LB);
                if !has(c, FA) && *fa > 0 {
                    *cell |= FA;
                    *fa -= 1;
                }
                if !has(c, FB) && *fb > 0 {
                    *cell |= FB;
                    *fb -= 1;
                }
            }
            Op::SearchInit => *cell &= !AT,
            Op::Draw { seen, big, fb } => {
                if has(c, FA) && !s.found {
                    let (r, _) = own(flags.odd);
                    put(cell, r, bit);
                    // Cell 1 is the first cell with FA.
                    *big |= bit && *seen > 0;
                }
                if has(c, FB) {
                    put(cell, D, *seen == 1);
                    *fb = fb.saturating_add(1);
                }
                *seen = seen.saturating_add(1);
            }
            Op::Load => {
                if has(c, FA) {
                    let (r, q) = own(flags.odd);
                    put(cell, q, has(c, r));
                    *cell &= !SC;
                }
                if has(c, FB) {
                    put(cell, H, has(c, D));
                }
            }
            Op::Round {
                sc,
                q,
                h,
                q_zero,
                h_zero,
            } => {
                if has(c, FA) {
                    let b = has(c, SC);
                    put(cell, SC, b ^ *sc);
                    *sc &= b;
                    if !s.q_done {
                        let (_, qt) = own(flags.odd);
                        let b = has(c, qt);
                        let nb = b ^ *q;
                        *q &= !b;
                        put(cell, qt, nb);
                        *q_zero &= !nb;
                    }
                }
                if has(c, FB) {
                    let b = if s.reload { has(c, D) } else { has(c, H) };
                    let nb = b ^ *h;
                    *h &= !b;
                    put(cell, H, nb);
                    *h_zero &= !nb;
                }
            }
            Op::NextDivisor { carry } => {
                if has(c, FB) {
                    let b = has(c, D);
                    put(cell, D, b ^ *carry);
                    *carry &= b;
                }
            }
            Op::NextAttempt { carry } => {
                if has(c, FA) {
                    let b = has(c, AT);
                    put(cell, AT, b ^ *carry);
                    *carry &= b;
                }
            }
            Op::SearchEnd => {
                let (_, q) = own(flags.odd);
                *cell &= !(q | SC | AT | D | H);
            }
            Op::Predicate {
                m_top,
                ones,
                zeros,
                enough,
                ok,
            } => {
                if has(c, LB) || !*m_top {
                    *m_top |= !has(c, LB);
                    if has(c, M) {
                        *ones = ones.saturating_add(1);
                        if *ones == 1 {
                            *ok = *zeros == 0 && *enough;
                        }
                    } else if *ones == 0 {
                        *zeros = (*zeros + 1) % self.config.length_step as u8;
                        *enough |= *zeros == 0;
                    }
                }
            }
            Op::HeadBase { left } => {
                *cell &= !T1;
                if !has(c, FH) && *left > 0 {
                    *cell |= FH;
                    *left -= 1;
                }
            }
            Op::Group {
                seen,
                left,
                grouped,
            } => {
                if !*seen && !has(c, T1) {
                    *seen = true;
                    if !has(c, M) {
                        *grouped = true;
                        *cell |= T1;
                        *left = self.config.length_step as u8 - 1;
                    }
                } else if *left > 0 {
                    *cell |= T1;
                    *left -= 1;
                }
            }
            Op::Widen { ft, fh } => {
                if !has(c, FT) && *ft > 0 {
                    *cell |= FT;
                    *ft -= 1;
                }
                if !has(c, FH) && *fh > 0 {
                    *cell |= FH;
                    *fh -= 1;
                }
            }
            Op::Toss { tc, hc, top } => {
                if has(c, FT) {
                    let b = has(c, TC);
                    put(cell, TC, b ^ *tc);
                    *tc &= b;
                }
                if has(c, FH) {
                    let b = has(c, HC);
                    let nb = b ^ *hc;
                    *hc &= b;
                    put(cell, HC, nb);
                    *top = nb;
                }
            }
        }
    }

    /// At the first cell past the used extent, before heading back.
    fn turn(&self, op: &mut Op) {
        if let Op::Digit {
            shift_a,
            shift_b,
            ge_a,
            ge_b,
            ..
        } = op
        {
            // A bit shifted out of the top means 2q + d ≥ 2^W > r.
            *ge_a |= *shift_a;
            *ge_b |= *shift_b;
        }
        if let Op::Next { pos, ge, .. } = op {
            if *pos < 64 && self.config.min_random_check_m >> *pos != 0 {
                *ge = false;
            }
        }
    }

    /// Work on a used cell on the way back.
    fn back(&self, op: &mut Op, flags: &mut Flags, cell: &mut TapeSymbol) {
        let c = *cell;
        match op {
            Op::Digit {
                d,
                ge_a,
                ge_b,
                place,
                ..
            } => {
                if has(c, FA) {
                    if !flags.own_det && *ge_a {
                        put(cell, own(flags.odd).1, has(c, T1));
                    }
                    if !flags.check_det && *ge_b {
                        put(cell, partner(!flags.odd).1, has(c, T2));
                    }
                    *cell &= !(T1 | T2);
                }
                if flags.check_det {
                    if *place {
                        *cell |= MK;
                        *place = false;
                    } else if has(c, MK) {
                        if has(c, ST) != *d {
                            flags.det_bad = true;
                        }
                        *cell &= !MK;
                        *place = true;
                    }
                }
            }
            Op::Next { marked, .. } if flags.own_det && !*marked && has(c, FS) => {
                *cell |= MK;
                *marked = true;
            }
            _ => {}
        }
    }

    /// Back at the anchor: where to go from here.
    fn finish(&self, op: Op, flags: &mut Flags, s: &mut Search, input: InputSymbol) -> Then {
        let c = self.config.c as u8;
        match op {
            Op::Init { .. } => Then::Dispatch,
            Op::Digit { d, m_carry, place, .. } => {
                if m_carry {
                    return Then::Reject(Self::length_failure(flags));
                }
                if flags.check_det {
                    if flags.exhausted {
                        flags.det_bad = true;
                    } else if place {
                        flags.exhausted = true;
                    }
                    if flags.det_bad {
                        return Then::Reject(Self::length_failure(flags));
                    }
                }
                flags.empty = false;
                flags.ones &= d;
                Then::Advance
            }
            Op::Check {
                carry,
                eq,
                eq_next,
                eq_y,
                eq_r,
                y_zero,
                ..
            } => {
                let length_ok = eq || (eq_next && !carry && flags.prev_ones);
                let det_ok = !flags.check_det || (!flags.det_bad && flags.exhausted);
                if !length_ok || !det_ok {
                    return Then::Reject(Self::length_failure(flags));
                }
                let random_ok = flags.check_det || eq_y || (eq_r && y_zero);
                if !random_ok {
                    if !self.equal_time {
                        return Then::Reject(FailureReason::BadSuccessor);
                    }
                    flags.doomed = true;
                }
                if input == InputSymbol::Sym(b'4') {
                    Then::Sweep(Op::Predicate {
                        m_top: false,
                        ones: 0,
                        zeros: 0,
                        enough: false,
                        ok: false,
                    })
                } else {
                    Then::Sweep(Op::next())
                }
            }
            Op::Next { grow, ge, .. } => {
                flags.sticky |= ge;
                if grow {
                    flags.m_odd = !flags.m_odd;
                }
                flags.check_det = flags.own_det;
                flags.own_det = !flags.sticky;
                flags.odd = !flags.odd;
                flags.first = false;
                flags.empty = true;
                flags.prev_ones = flags.ones;
                flags.ones = true;
                flags.det_bad = false;
                flags.exhausted = false;
                if grow {
                    Then::Sweep(Op::Resize {
                        fa: c,
                        fb: if flags.m_odd { c } else { 0 },
                        lb_ok: false,
                    })
                } else if flags.sticky {
                    Then::Sweep(Op::SearchInit)
                } else {
                    Then::Advance
                }
            }
            Op::Resize { .. } => {
                if flags.sticky {
                    Then::Sweep(Op::SearchInit)
                } else {
                    Then::Advance
                }
            }
            Op::SearchInit => {
                *s = Search::default();
                Then::Sweep(Op::Draw { seen: 0, big: false, fb: 0 })
            }
            Op::Draw { big, fb, .. } => {
                if !s.found {
                    s.big = big;
                }
                s.composite = false;
                if fb < 2 {
                    // No divisor fits: the candidate stands as drawn.
                    Then::Sweep(Op::NextAttempt { carry: true })
                } else {
                    Then::Sweep(Op::Load)
                }
            }
            Op::Load => {
                s.q_done = false;
                s.h_hit = false;
                s.reload = false;
                Then::Sweep(Op::round())
            }
            Op::Round {
                sc, q_zero, h_zero, ..
            } => {
                let q_hit = !s.q_done && q_zero;
                if q_hit && h_zero && s.h_hit {
                    s.composite = true;
                }
                s.q_done |= q_hit;
                s.h_hit |= h_zero;
                s.reload = h_zero;
                if sc || (!self.equal_time && s.q_done) {
                    Then::Sweep(Op::NextDivisor { carry: true })
                } else {
                    Then::Sweep(Op::round())
                }
            }
            Op::NextDivisor { carry } => {
                if carry || (!self.equal_time && s.composite) {
                    Then::Sweep(Op::NextAttempt { carry: true })
                } else {
                    Then::Sweep(Op::Load)
                }
            }
            Op::NextAttempt { carry } => {
                if !s.found && !s.composite && s.big {
                    s.found = true;
                }
                if carry || (!self.equal_time && s.found) {
                    Then::Sweep(Op::SearchEnd)
                } else {
                    Then::Sweep(Op::Draw { seen: 0, big: false, fb: 0 })
                }
            }
            Op::SearchEnd => Then::Advance,
            Op::Predicate { ones, ok, .. } => {
                if ones == 1 && ok {
                    Then::Sweep(Op::HeadBase {
                        left: self.config.modulus_base as u8,
                    })
                } else {
                    Then::Reject(FailureReason::LengthPredicate)
                }
            }
            Op::HeadBase { .. } => Then::Sweep(Op::group()),
            Op::Group { grouped, .. } => {
                if grouped {
                    Then::Sweep(Op::Widen {
                        ft: self.config.toss_step as u8,
                        fh: self.config.modulus_step as u8,
                    })
                } else {
                    Then::Toss
                }
            }
            Op::Widen { .. } => Then::Sweep(Op::group()),
            Op::Toss { tc, top, .. } => {
                if tc {
                    Then::Final(top)
                } else {
                    Then::Toss
                }
            }
        }
    }

    /// Start of a sweep (or whatever `then` says) from the anchor, this step.
    fn at_anchor(&self, then: Then, flags: Flags, s: Search, input: InputSymbol, out: &mut Out) {
        let anchor = ANCHOR | USED;
        let sweep = |op| LoglogState::Sweep {
            op,
            back: false,
            flags,
            search: s,
        };
        let action = match then {
            Then::Sweep(op) => TapeAction::wait(sweep(op), anchor, HeadMove::Right),
            Then::Toss => {
                out.push(Branch::new(
                    Weight::heads(0),
                    TapeAction::wait(sweep(Op::toss(true)), anchor, HeadMove::Right),
                ));
                out.push(Branch::new(
                    Weight::tails(0),
                    TapeAction::wait(sweep(Op::toss(false)), anchor, HeadMove::Right),
                ));
                return;
            }
            Then::Advance => TapeAction::go(LoglogState::Idle(flags), anchor, HeadMove::Stay),
            Then::Dispatch => return self.dispatch(flags, input, out),
            Then::Reject(r) => {
                // A remembered fingerprint mismatch is the earliest failure.
                let r = if flags.doomed { FailureReason::BadSuccessor } else { r };
                TapeAction::go(LoglogState::Reject(Some(r)), anchor, HeadMove::Stay)
            }
            Then::Final(top) => TapeAction::go(
                LoglogState::AtEnd {
                    top,
                    doomed: flags.doomed,
                },
                anchor,
                HeadMove::Stay,
            ),
        };
        out.push(Branch::certain(action));
    }

    /// First step on a fresh input symbol.
    fn dispatch(&self, flags: Flags, input: InputSymbol, out: &mut Out) {
        let then = match input {
            InputSymbol::Sym(b @ (b'0' | b'1')) => {
                if flags.empty && b == b'0' {
                    Then::Reject(FailureReason::BadDigit)
                } else {
                    Then::Sweep(Op::digit(b == b'1'))
                }
            }
            InputSymbol::Sym(b'2' | b'4') if !flags.empty => Then::Sweep(Op::check()),
            InputSymbol::RightEnd => Then::Reject(FailureReason::MissingTerminal),
            _ => Then::Reject(FailureReason::BadDigit),
        };
        self.at_anchor(then, flags, Search::default(), input, out)
    }

    /// Used extent and the extent of each flag track on a tape.
    pub fn extents(tape: &Tape) -> Extents {
        let mut e = Extents::default();
        let mut pos = 1i64;
        loop {
            let c = tape.get(pos);
            if !has(c, USED) {
                break;
            }
            e.used += 1;
            e.lb += u64::from(has(c, LB));
            e.fa += u64::from(has(c, FA));
            e.fb += u64::from(has(c, FB));
            e.fs += u64::from(has(c, FS));
            e.fh += u64::from(has(c, FH));
            e.ft += u64::from(has(c, FT));
            pos += 1;
        }
        e
    }

    /// Reads the number on `t` from cell 1 up to the used extent.
    pub fn read_track(tape: &Tape, t: u32) -> u128 {
        let mut v = 0u128;
        let mut pos = 1i64;
        while has(tape.get(pos), USED) && pos <= 128 {
            if has(tape.get(pos), t) {
                v |= 1 << (pos - 1);
            }
            pos += 1;
        }
        v
    }
}

/// `q ← 2q + in`, with `q - r` written to `tmp` and `ge` tracking `2q + in ≥ r`.
fn shift_sub(
    cell: &mut TapeSymbol,
    (r, q): (u32, u32),
    tmp: u32,
    shift: &mut bool,
    borrow: &mut bool,
    ge: &mut bool,
) {
    let c = *cell;
    let nq = *shift;
    *shift = has(c, q);
    let rb = has(c, r);
    put(cell, q, nq);
    put(cell, tmp, nq ^ rb ^ *borrow);
    *borrow = (!nq && rb) || (!(nq ^ rb) && *borrow);
    if nq != rb {
        *ge = nq;
    }
}

/// Sizes of the tape areas, in cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Extents {
    pub used: u64,
    pub lb: u64,
    pub fa: u64,
    pub fb: u64,
    pub fs: u64,
    pub fh: u64,
    pub ft: u64,
}

/// Widths of the nine registers of the equal-time machine for a block
/// length `m`, in cells, as if each were laid out on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualTimeLayout {
    /// `m` and `m0` interleaved.
    pub lengths: u64,
    pub heads: u64,
    pub attempts: u64,
    /// Each of the four prime registers, `r` and `q` interleaved.
    pub prime: u64,
    pub subtractions: u64,
    /// `d` and `h` interleaved.
    pub divisor: u64,
}

impl EqualTimeLayout {
    pub fn for_length(m: u64, c: u64) -> Self {
        let bits = u64::from(64 - m.leading_zeros());
        let half = bits.div_ceil(2);
        EqualTimeLayout {
            lengths: 2 * (bits + 1),
            heads: half + 2,
            attempts: bits * c,
            prime: 2 * bits * c,
            subtractions: bits * c,
            divisor: 2 * half * c,
        }
    }

    pub fn total(&self) -> u64 {
        self.lengths + self.heads + self.attempts + 4 * self.prime + self.subtractions + self.divisor
    }
}

impl TapeProgram for LoglogMachine {
    type State = LoglogState;

    fn mode(&self) -> Mode {
        Mode::OneWay
    }

    fn coins(&self) -> &[Coin] {
        &self.coins
    }

    fn initial(&self) -> LoglogState {
        LoglogState::Start
    }

    fn halted(&self, state: &LoglogState) -> Option<bool> {
        match state {
            LoglogState::Accept => Some(true),
            LoglogState::Reject(_) => Some(false),
            _ => None,
        }
    }

    fn transitions(
        &self,
        state: &LoglogState,
        input: InputSymbol,
        scanned: TapeSymbol,
        out: &mut Out,
    ) -> Result<(), OracleError> {
        let reject = |r| LoglogState::Reject(Some(r));
        match *state {
            LoglogState::Start => {
                let next = if input == InputSymbol::LeftEnd {
                    LoglogState::Boot
                } else {
                    reject(FailureReason::BadDigit)
                };
                out.push(Branch::certain(TapeAction::go(next, ANCHOR | USED, HeadMove::Stay)));
            }
            LoglogState::Boot => {
                self.at_anchor(
                    Then::Sweep(Op::Init { done: false }),
                    Flags::start(),
                    Search::default(),
                    input,
                    out,
                );
            }
            LoglogState::Idle(flags) => self.dispatch(flags, input, out),
            LoglogState::Sweep {
                mut op,
                back: false,
                flags,
                search,
            } => {
                let mut cell = scanned;
                let claim = !has(cell, USED) && !has(cell, ANCHOR) && self.wants(&op, &flags);
                if has(cell, USED) && !has(cell, ANCHOR) || claim {
                    cell |= USED;
                    let draws = matches!(op, Op::Draw { .. })
                        && has(cell, FA)
                        && !search.found;
                    let bits: &[bool] = if draws { &[false, true] } else { &[false] };
                    for &bit in bits {
                        let (mut op, mut flags, mut cell) = (op, flags, cell);
                        self.out(&mut op, &mut flags, &search, &mut cell, bit);
                        let next = LoglogState::Sweep {
                            op,
                            back: false,
                            flags,
                            search,
                        };
                        let action = TapeAction::wait(next, cell, HeadMove::Right);
                        out.push(if draws {
                            Branch::new(Weight::half(bit), action)
                        } else {
                            Branch::certain(action)
                        });
                    }
                } else if has(cell, ANCHOR) {
                    return Err(OracleError::Invalid("sweep re-entered the anchor".into()));
                } else {
                    self.turn(&mut op);
                    let next = LoglogState::Sweep {
                        op,
                        back: true,
                        flags,
                        search,
                    };
                    out.push(Branch::certain(TapeAction::wait(next, cell, HeadMove::Left)));
                }
            }
            LoglogState::Sweep {
                mut op,
                back: true,
                mut flags,
                mut search,
            } => {
                if has(scanned, ANCHOR) {
                    let then = self.finish(op, &mut flags, &mut search, input);
                    self.at_anchor(then, flags, search, input, out);
                } else {
                    let mut cell = scanned;
                    self.back(&mut op, &mut flags, &mut cell);
                    let next = LoglogState::Sweep {
                        op,
                        back: true,
                        flags,
                        search,
                    };
                    out.push(Branch::certain(TapeAction::wait(next, cell, HeadMove::Left)));
                }
            }
            LoglogState::AtEnd { top, doomed } => {
                let next = match input {
                    _ if doomed => reject(FailureReason::BadSuccessor),
                    InputSymbol::RightEnd if top => LoglogState::Accept,
                    InputSymbol::RightEnd => LoglogState::Reject(None),
                    _ => reject(FailureReason::BadDigit),
                };
                out.push(Branch::certain(TapeAction::go(next, scanned, HeadMove::Stay)));
            }
            LoglogState::Accept | LoglogState::Reject(_) => {
                out.push(Branch::certain(TapeAction::go(*state, scanned, HeadMove::Stay)));
            }
        }
        Ok(())
    }

    fn input_alphabet(&self) -> Vec<u8> {
        b"0124".to_vec()
    }
}
