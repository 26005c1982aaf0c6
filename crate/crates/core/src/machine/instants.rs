//! Decision-instant scans over unary inputs.
//!
//! A unary input `a^n` is read one symbol per step, so `n` doubles as a time
//! index. A scan feeds an endless stream of `a` and, after each prefix `a^n`,
//! asks whether reading `$` right now would accept.

use super::counter::{CounterProgram, CounterRun};
use super::random::BitSource;
use super::tape::{TapeProgram, TapeRun};
use super::{EngineError, Input, InputSymbol};
use num_bigint::BigUint;

/// What one scan saw.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanReport {
    /// Lengths `n` at which `$` would accept on this path.
    pub accepting: Vec<u128>,
    /// Lengths `n` at which the builder marks an iteration as just completed.
    pub boundaries: Vec<u128>,
    /// Largest prefix length examined.
    pub scanned: u128,
}

/// A run that can be driven one symbol at a time and probed at `$`.
pub trait UnaryScan {
    fn step_unary<R: BitSource + ?Sized>(&mut self, rng: &mut R) -> Result<(), EngineError>;
    fn probe_end(&self) -> Result<Option<bool>, EngineError>;
    fn at_boundary(&self) -> bool;
    fn halted(&self) -> bool;
    /// Framed input position of the head.
    fn position(&self) -> u128;
}

impl<P: TapeProgram> UnaryScan for TapeRun<'_, P> {
    fn step_unary<R: BitSource + ?Sized>(&mut self, rng: &mut R) -> Result<(), EngineError> {
        self.step(rng)
    }

    fn probe_end(&self) -> Result<Option<bool>, EngineError> {
        self.probe(InputSymbol::RightEnd)
    }

    fn at_boundary(&self) -> bool {
        self.phase_tag().is_some_and(|t| t.boundary)
    }

    fn halted(&self) -> bool {
        TapeRun::halted(self).is_some()
    }

    fn position(&self) -> u128 {
        self.config.input_pos
    }
}

impl<P: CounterProgram> UnaryScan for CounterRun<'_, P> {
    fn step_unary<R: BitSource + ?Sized>(&mut self, rng: &mut R) -> Result<(), EngineError> {
        self.step(rng)
    }

    fn probe_end(&self) -> Result<Option<bool>, EngineError> {
        self.probe(InputSymbol::RightEnd)
    }

    fn at_boundary(&self) -> bool {
        self.phase_tag().is_some_and(|t| t.boundary)
    }

    fn halted(&self) -> bool {
        CounterRun::halted(self).is_some()
    }

    fn position(&self) -> u128 {
        self.config.input_pos
    }
}

/// Scans an already started run (positioned before `¢`) up to `max_len`.
///
/// The run must be realtime: after each step the input head sits right after
/// the prefix read so far.
pub fn scan<S: UnaryScan, R: BitSource + ?Sized>(
    run: &mut S,
    max_len: u128,
    rng: &mut R,
) -> Result<ScanReport, EngineError> {
    let mut report = ScanReport::default();
    loop {
        if run.halted() {
            return Ok(report);
        }
        run.step_unary(rng)?;
        // `position() - 1` symbols of `w` have been read.
        let n = run.position() - 1;
        if run.halted() {
            return Ok(report);
        }
        if run.probe_end()? == Some(true) {
            report.accepting.push(n);
        }
        if run.at_boundary() {
            report.boundaries.push(n);
        }
        report.scanned = n;
        if n >= max_len {
            return Ok(report);
        }
    }
}

/// Scan of a unary tape machine on `a^∞` up to `max_len`.
pub fn scan_tape_instants<P: TapeProgram, R: BitSource + ?Sized>(
    prog: &P,
    max_len: u128,
    rng: &mut R,
) -> Result<ScanReport, EngineError> {
    // Any length beyond u128 behaves as an endless stream.
    let endless = Input::Unary(BigUint::from(1u8) << 200u32);
    let mut run = TapeRun::new(prog, &endless);
    scan(&mut run, max_len, rng)
}

/// Scan of a counter machine on `a^∞` up to `max_len`.
pub fn scan_counter_instants<P: CounterProgram, R: BitSource + ?Sized>(
    prog: &P,
    max_len: u128,
    rng: &mut R,
) -> Result<ScanReport, EngineError> {
    let mut run = CounterRun::new(prog, None);
    scan(&mut run, max_len, rng)
}
