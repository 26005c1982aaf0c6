//! Two counters simulating up to four.
//!
//! Counter `A` holds `2^c1·3^c2·5^c3·7^c4`, counter `B` is scratch. One step
//! of the simulated machine becomes a block of real steps:
//!
//! * one step choosing the simulated transition from the zero tests, which
//!   are kept in the control state (on `¢` it also sets `A = 1`);
//! * multiplying `A` by `num/den`, where `num` is the product of the primes
//!   whose counter goes up and `den` of those going down, by moving `A` into
//!   `B` in rounds of `max(num, den)` steps;
//! * moving `B` back into `A` while counting it modulo `2·3·5·7`, which gives
//!   the next zero tests;
//! * idle steps up to the budget `B(t)`.
//!
//! The budget depends only on `t`, through the largest value `A` can have
//! after `t` simulated steps, so the block lengths never depend on the coin.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::smallvec;

use crate::coin::{Coin, SetSpec};
use crate::machine::counter::{step_once, CounterAction, CounterConfig, CounterProgram, CounterRun, Cycle, Delta};
use crate::machine::random::SeededBits;
use crate::machine::weights::DrawCounts;
use crate::machine::{
    Branch, EngineError, InputSymbol, Limits, OracleError, Outcomes, PhaseTag, Weight, UNARY,
};

const A: usize = 0;
const B: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetRule {
    /// One real step per simulated step; only meaningful for the instant
    /// formula, the simulation itself overflows it.
    Unit,
    /// `2 + P·Amax(t) + Amax(t+1)` with `P` the product of the primes.
    Worst,
}

/// Primes, a-priori counter bounds and the resulting per-step budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinskyCostModel {
    pub primes: [u32; 4],
    /// Largest value counter `i` ever takes; `None` if only `t` bounds it.
    pub caps: [Option<u64>; 4],
    pub rule: BudgetRule,
}

impl MinskyCostModel {
    pub fn new(caps: [Option<u64>; 4]) -> Self {
        MinskyCostModel {
            primes: [2, 3, 5, 7],
            caps,
            rule: BudgetRule::Worst,
        }
    }

    /// `k` counters, each bounded by `bound`; the others are unused.
    pub fn for_counters(k: usize, bound: Option<u64>) -> Self {
        let mut caps = [Some(0); 4];
        for c in caps.iter_mut().take(k) {
            *c = bound;
        }
        Self::new(caps)
    }

    pub fn unit(caps: [Option<u64>; 4]) -> Self {
        MinskyCostModel {
            rule: BudgetRule::Unit,
            ..Self::new(caps)
        }
    }

    /// `P`, the modulus of the zero tests.
    pub fn modulus(&self) -> u32 {
        self.primes.iter().product()
    }

    fn exponent(&self, i: usize, t: u64) -> u64 {
        self.caps[i].map_or(t, |c| c.min(t))
    }

    /// Largest value of `A` after `t` simulated steps.
    pub fn amax(&self, t: u64) -> BigUint {
        (0..4).fold(BigUint::one(), |acc, i| {
            acc * BigUint::from(self.primes[i]).pow(self.exponent(i, t) as u32)
        })
    }

    /// Real steps given to simulated step `t`.
    pub fn budget(&self, t: u64) -> BigUint {
        match self.rule {
            BudgetRule::Unit => BigUint::one(),
            BudgetRule::Worst => {
                BigUint::from(2u32) + self.amax(t) * self.modulus() + self.amax(t + 1)
            }
        }
    }

    /// `Σ_{t=0}^{n} Amax(t)`, summed as a piecewise geometric series.
    fn amax_sum(&self, n: u64) -> BigUint {
        let mut cuts: Vec<u64> = self.caps.iter().flatten().copied().filter(|&c| c < n).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut total = BigUint::zero();
        let mut lo = 0u64;
        for hi in cuts.into_iter().chain(std::iter::once(n)) {
            if hi < lo {
                continue;
            }
            // On [lo, hi] counters with cap ≥ hi grow with t, the rest are fixed.
            let mut fixed = BigUint::one();
            let mut ratio = 1u64;
            for i in 0..4 {
                match self.caps[i] {
                    Some(c) if c < hi => fixed *= BigUint::from(self.primes[i]).pow(c as u32),
                    _ => ratio *= u64::from(self.primes[i]),
                }
            }
            let segment = if ratio == 1 {
                BigUint::from(hi - lo + 1)
            } else {
                let r = BigUint::from(ratio);
                (r.pow((hi + 1) as u32) - r.pow(lo as u32)) / (ratio - 1)
            };
            total += fixed * segment;
            lo = hi + 1;
        }
        total
    }

    /// `Σ_{t=0}^{n} B(t)`, the real steps up to and including simulated step `n`.
    pub fn total_through(&self, n: u64) -> BigUint {
        match self.rule {
            BudgetRule::Unit => BigUint::from(n + 1),
            BudgetRule::Worst => {
                BigUint::from(2 * (n + 1)) + self.amax_sum(n) * self.modulus()
                    + self.amax_sum(n + 1)
                    - 1u32
            }
        }
    }

    pub fn encode(&self, counters: &[u128]) -> BigUint {
        counters.iter().zip(self.primes).fold(BigUint::one(), |acc, (&c, p)| {
            acc * BigUint::from(p).pow(c as u32)
        })
    }

    /// Exponents of the four primes in `a`, or `None` if `a` has other factors.
    pub fn decode(&self, a: &BigUint) -> Option<[u32; 4]> {
        if a.is_zero() {
            return None;
        }
        let mut rest = a.clone();
        let mut exps = [0u32; 4];
        for (e, &p) in exps.iter_mut().zip(&self.primes) {
            let p = BigUint::from(p);
            while (&rest % &p).is_zero() {
                rest /= &p;
                *e += 1;
            }
        }
        rest.is_one().then_some(exps)
    }
}

/// Lengths of the two-counter members matching the given instants of the
/// simulated machine: the real steps through simulated step `n`, minus `¢`.
pub fn predicted_accept_instants_2c(model: &MinskyCostModel, instants: &[BigUint]) -> Vec<BigUint> {
    instants
        .iter()
        .map(|n| {
            let n = n.to_u64().expect("instant beyond u64");
            model.total_through(n) - 1u32
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinskyState<S> {
    /// Start of simulated step `t`; `zero` are the simulated zero tests.
    Decide { sim: S, zero: [bool; 4], t: u64 },
    /// Multiplying `A` by `num/den`; `j` is the position in the round.
    Scale { sim: S, t: u64, num: u32, den: u32, j: u32, used: u128, budget: u128 },
    /// Moving `B` back into `A`; `residue` is what arrived, modulo `P`.
    Copy { sim: S, t: u64, residue: u32, used: u128, budget: u128 },
    /// Idle steps before simulated step `t + 1`.
    Pad { sim: S, zero: [bool; 4], t: u64, left: u128 },
    Accept,
    Reject,
}

impl<S> MinskyState<S> {
    /// The simulated configuration at a step boundary.
    pub fn boundary(&self) -> Option<(&S, u64)> {
        match self {
            MinskyState::Decide { sim, t, .. } => Some((sim, *t)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinskyMachine<P> {
    pub inner: P,
    pub model: MinskyCostModel,
}

/// Wraps `spec4` (at most four counters) into a two-counter automaton.
pub fn minsky_two_counter<P: CounterProgram>(spec4: P, model: MinskyCostModel) -> MinskyMachine<P> {
    assert!(spec4.counters() <= 4, "at most four counters");
    MinskyMachine { inner: spec4, model }
}

impl<P: CounterProgram> MinskyMachine<P> {
    fn budget(&self, t: u64) -> Result<u128, OracleError> {
        self.model
            .budget(t)
            .to_u128()
            .ok_or_else(|| OracleError::Capacity(format!("budget of simulated step {t}")))
    }

    fn tick(&self, t: u64, used: u128, budget: u128) -> Result<u128, OracleError> {
        if used + 1 > budget {
            return Err(OracleError::BudgetOverflow { step: t, budget });
        }
        Ok(used + 1)
    }

    /// Zero tests of the simulated counters, from `A mod P`.
    fn zero_tests(&self, residue: u32) -> [bool; 4] {
        let k = self.inner.counters();
        let mut z = [true; 4];
        for (i, zi) in z.iter_mut().enumerate().take(k) {
            *zi = !residue.is_multiple_of(self.model.primes[i]);
        }
        z
    }

    fn round(num: u32, den: u32) -> Vec<Delta> {
        (0..num.max(den))
            .map(|j| smallvec![-i8::from(j < den), i8::from(j < num)])
            .collect()
    }
}

impl<P: CounterProgram> CounterProgram for MinskyMachine<P> {
    type State = MinskyState<P::State>;

    fn counters(&self) -> usize {
        2
    }

    fn coins(&self) -> &[Coin] {
        self.inner.coins()
    }

    fn initial(&self) -> Self::State {
        MinskyState::Decide {
            sim: self.inner.initial(),
            zero: [true; 4],
            t: 0,
        }
    }

    fn halted(&self, state: &Self::State) -> Option<bool> {
        match state {
            MinskyState::Accept => Some(true),
            MinskyState::Reject => Some(false),
            _ => None,
        }
    }

    fn transitions(
        &self,
        state: &Self::State,
        input: InputSymbol,
        zero: &[bool],
        out: &mut Outcomes<CounterAction<Self::State>>,
    ) -> Result<(), OracleError> {
        use MinskyState::*;
        let act = |next, a: i8, b: i8| CounterAction::new(next, &[a, b]);
        if input == InputSymbol::RightEnd {
            let Decide { sim, zero: z, .. } = state else {
                out.push(Branch::certain(act(Reject, 0, 0)));
                return Ok(());
            };
            let mut inner = Outcomes::new();
            self.inner.transitions(sim, input, &z[..self.inner.counters()], &mut inner)?;
            for b in inner {
                let next = match self.inner.halted(&b.action.next) {
                    Some(true) => Accept,
                    _ => Reject,
                };
                out.push(Branch::new(b.weight, act(next, 0, 0)));
            }
            return Ok(());
        }
        match state {
            Decide { sim, zero: z, t } => {
                let budget = self.budget(*t)?;
                let mut inner = Outcomes::new();
                self.inner.transitions(sim, input, &z[..self.inner.counters()], &mut inner)?;
                for b in inner {
                    let next = match self.inner.halted(&b.action.next) {
                        Some(true) => Accept,
                        Some(false) => Reject,
                        None => {
                            let (mut num, mut den) = (1u32, 1u32);
                            for (i, &d) in b.action.delta.iter().enumerate() {
                                match d {
                                    1 => num *= self.model.primes[i],
                                    -1 => den *= self.model.primes[i],
                                    _ => {}
                                }
                            }
                            Scale { sim: b.action.next, t: *t, num, den, j: 0, used: 1, budget }
                        }
                    };
                    // Counters start at zero; `A` must start at 1.
                    let init = i8::from(input == InputSymbol::LeftEnd);
                    out.push(Branch::new(b.weight, act(next, init, 0)));
                }
                return Ok(());
            }
            Scale { sim, t, num, den, j, used, budget } => {
                let used = self.tick(*t, *used, *budget)?;
                let branch = if *j == 0 && zero[A] {
                    if zero[B] {
                        act(Reject, 0, 0)
                    } else {
                        let residue = 1 % self.model.modulus();
                        act(Copy { sim: sim.clone(), t: *t, residue, used, budget: *budget }, 1, -1)
                    }
                } else if *j < *den && zero[A] {
                    act(Reject, 0, 0)
                } else {
                    let next = Scale {
                        j: (j + 1) % num.max(den),
                        used,
                        sim: sim.clone(),
                        t: *t,
                        num: *num,
                        den: *den,
                        budget: *budget,
                    };
                    act(next, -i8::from(j < den), i8::from(j < num))
                };
                out.push(Branch::certain(branch));
            }
            Copy { sim, t, residue, used, budget } => {
                let used = self.tick(*t, *used, *budget)?;
                let branch = if zero[B] {
                    let z = self.zero_tests(*residue);
                    let left = budget - used;
                    if left == 0 {
                        act(Decide { sim: sim.clone(), zero: z, t: t + 1 }, 0, 0)
                    } else {
                        act(Pad { sim: sim.clone(), zero: z, t: *t, left }, 0, 0)
                    }
                } else {
                    let residue = (residue + 1) % self.model.modulus();
                    act(Copy { sim: sim.clone(), t: *t, residue, used, budget: *budget }, 1, -1)
                };
                out.push(Branch::certain(branch));
            }
            Pad { sim, zero: z, t, left } => {
                let next = if *left == 1 {
                    Decide { sim: sim.clone(), zero: *z, t: t + 1 }
                } else {
                    Pad { sim: sim.clone(), zero: *z, t: *t, left: left - 1 }
                };
                out.push(Branch::certain(act(next, 0, 0)));
            }
            Accept | Reject => out.push(Branch::certain(act(state.clone(), 0, 0))),
        }
        Ok(())
    }

    fn phase_tag(&self, state: &Self::State, _zero: &[bool]) -> Option<PhaseTag> {
        let MinskyState::Decide { sim, zero, t } = state else {
            return Some(PhaseTag { iteration: 0, boundary: false });
        };
        let inner = self.inner.phase_tag(sim, &zero[..self.inner.counters()]);
        Some(PhaseTag {
            iteration: *t,
            boundary: inner.is_some_and(|p| p.boundary),
        })
    }

    fn input_alphabet(&self) -> Vec<u8> {
        self.inner.input_alphabet()
    }

    fn cycle(&self, state: &Self::State) -> Option<Cycle> {
        match state {
            MinskyState::Scale { j: 0, num, den, used, budget, .. } => {
                let deltas = Self::round(*num, *den);
                let len = deltas.len() as u128;
                Some(Cycle {
                    deltas,
                    watched: smallvec![true, false],
                    max_passes: Some((budget - used) / len),
                })
            }
            MinskyState::Copy { used, budget, .. } => Some(Cycle {
                deltas: vec![smallvec![1, -1]],
                watched: smallvec![false, true],
                max_passes: Some(budget - used),
            }),
            MinskyState::Pad { left, .. } => Some(Cycle {
                deltas: vec![smallvec![0, 0]],
                watched: smallvec![false, false],
                max_passes: Some(left - 1),
            }),
            _ => None,
        }
    }

    fn skip(&self, state: &Self::State, passes: u128) -> Self::State {
        let mut next = state.clone();
        match &mut next {
            MinskyState::Scale { num, den, used, .. } => {
                *used += passes * u128::from((*num).max(*den));
            }
            MinskyState::Copy { residue, used, .. } => {
                let m = u128::from(self.model.modulus());
                *residue = ((u128::from(*residue) + passes) % m) as u32;
                *used += passes;
            }
            MinskyState::Pad { left, .. } => *left -= passes,
            _ => {}
        }
        next
    }
}

/// A random four-counter automaton whose counters stay within `0..=bound`.
///
/// Its control state carries the counter values, so every transition can
/// respect the bound; the choice of transition is a fixed pseudo-random
/// function of the seed, the state and the input symbol.
#[derive(Clone, Debug)]
pub struct SyntheticMachine {
    pub seed: u64,
    pub ids: u8,
    pub bound: u8,
    coins: [Coin; 1],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SynState {
    Run { id: u8, values: [u8; 4] },
    Accept,
    Reject,
}

impl SyntheticMachine {
    pub fn new(seed: u64, set: SetSpec) -> Self {
        SyntheticMachine {
            seed,
            ids: 5,
            bound: 8,
            coins: [Coin::new(set)],
        }
    }

    pub fn values(state: &SynState) -> Option<[u8; 4]> {
        match state {
            SynState::Run { values, .. } => Some(*values),
            _ => None,
        }
    }

    fn table_rng(&self, id: u8, values: [u8; 4], input: InputSymbol) -> ChaCha8Rng {
        let sym = match input {
            InputSymbol::LeftEnd => 0u64,
            InputSymbol::Sym(c) => 1 + u64::from(c),
            InputSymbol::RightEnd => 300,
        };
        let key = values
            .iter()
            .fold(u64::from(id), |k, &v| k << 8 | u64::from(v))
            << 16
            | sym;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(key);
        rng
    }
}

impl CounterProgram for SyntheticMachine {
    type State = SynState;

    fn counters(&self) -> usize {
        4
    }

    fn coins(&self) -> &[Coin] {
        &self.coins
    }

    fn initial(&self) -> SynState {
        SynState::Run { id: 0, values: [0; 4] }
    }

    fn halted(&self, state: &SynState) -> Option<bool> {
        match state {
            SynState::Accept => Some(true),
            SynState::Reject => Some(false),
            SynState::Run { .. } => None,
        }
    }

    fn transitions(
        &self,
        state: &SynState,
        input: InputSymbol,
        zero: &[bool],
        out: &mut Outcomes<CounterAction<SynState>>,
    ) -> Result<(), OracleError> {
        let SynState::Run { id, values } = *state else {
            out.push(Branch::certain(CounterAction::new(*state, &[0; 4])));
            return Ok(());
        };
        let mut rng = self.table_rng(id, values, input);
        let weights = match rng.gen_range(0..3) {
            0 => vec![Weight::one()],
            1 => vec![Weight::half(false), Weight::half(true)],
            _ => vec![Weight::heads(0), Weight::tails(0)],
        };
        for w in weights {
            let action = if input == InputSymbol::RightEnd {
                let next = if rng.gen_bool(0.5) { SynState::Accept } else { SynState::Reject };
                CounterAction::new(next, &[0; 4])
            } else {
                let mut delta = [0i8; 4];
                let mut next = values;
                for i in 0..4 {
                    let down = !zero[i] && values[i] > 0;
                    let up = values[i] < self.bound;
                    let d = match rng.gen_range(0..3) {
                        0 if down => -1,
                        1 if up => 1,
                        _ => 0,
                    };
                    delta[i] = d;
                    next[i] = (i16::from(values[i]) + i16::from(d)) as u8;
                }
                let id = rng.gen_range(0..self.ids);
                CounterAction::new(SynState::Run { id, values: next }, &delta)
            };
            out.push(Branch::new(w, action));
        }
        Ok(())
    }
}

/// Result of running a synthetic machine directly and through the
/// two-counter simulation side by side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lockstep {
    pub steps_checked: u64,
    /// Human-readable description of each disagreement.
    pub mismatches: Vec<String>,
}

/// Runs `SyntheticMachine::new(seed, set)` for `steps` steps directly and
/// through [`minsky_two_counter`], comparing the decoded configuration and
/// the real step count at every simulated step boundary.
pub fn minsky_lockstep(seed: u64, set: SetSpec, steps: u64) -> Result<Lockstep, EngineError> {
    let spec = SyntheticMachine::new(seed, set);
    let model = MinskyCostModel::for_counters(4, Some(u64::from(spec.bound)));
    let two = minsky_two_counter(spec.clone(), model.clone());

    let mut direct = CounterConfig::new(spec.initial(), 4);
    let mut draws = DrawCounts::default();
    let mut rng = SeededBits::new(seed);
    let mut trace = vec![(direct.state, direct.counters.clone())];
    for t in 0..steps {
        if spec.halted(&direct.state).is_some() {
            break;
        }
        let sym = if t == 0 { InputSymbol::LeftEnd } else { InputSymbol::Sym(UNARY) };
        step_once(&spec, &mut direct, sym, &mut rng, &mut draws)?;
        trace.push((direct.state, direct.counters.clone()));
    }

    let mut report = Lockstep::default();
    let mut run = CounterRun::new(&two, None).accelerated();
    let mut rng = SeededBits::new(seed);
    let total = model.total_through(steps - 1).to_u128().unwrap_or(u128::MAX);
    let mut seen = Vec::new();
    run.run_observed(&mut rng, &Limits::steps(total), |r| {
        if let MinskyState::Decide { sim, t, .. } = &r.config.state {
            let decoded = model.decode(&BigUint::from(r.config.counters[A]));
            seen.push((*t, *sim, decoded, r.config.steps));
        }
    })?;
    for (t, sim, decoded, real) in seen {
        let Some((state, counters)) = trace.get(t as usize) else { continue };
        report.steps_checked += 1;
        if sim != *state {
            report.mismatches.push(format!("step {t}: state {sim:?}, direct {state:?}"));
        }
        let decoded: Option<Vec<u128>> = decoded.map(|c| c.iter().map(|&x| u128::from(x)).collect());
        if decoded.as_ref() != Some(counters) {
            report.mismatches.push(format!("step {t}: counters {decoded:?}, direct {counters:?}"));
        }
        if t > 0 && BigUint::from(real) != model.total_through(t - 1) {
            report.mismatches.push(format!("step {t}: began at real step {real}, budget sum {}", model.total_through(t - 1)));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::counter::CounterRun;
    use crate::machine::random::SeededBits;
    use crate::machine::Limits;

    #[test]
    fn decode_examples() {
        let m = MinskyCostModel::for_counters(4, Some(8));
        assert_eq!(m.decode(&BigUint::from(50u32)), Some([1, 0, 2, 0]));
        assert_eq!(m.decode(&BigUint::one()), Some([0; 4]));
        assert_eq!(m.decode(&BigUint::from(22u32)), None);
        assert_eq!(m.encode(&[3, 1, 0, 2]), BigUint::from(8u32 * 3 * 49));
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        let models = [
            MinskyCostModel::for_counters(4, Some(8)),
            MinskyCostModel::for_counters(2, None),
            MinskyCostModel::new([Some(2), None, Some(5), Some(0)]),
        ];
        for m in &models {
            let mut direct = BigUint::zero();
            for n in 0..30u64 {
                direct += m.budget(n);
                assert_eq!(m.total_through(n), direct, "{m:?} n = {n}");
            }
        }
    }

    #[test]
    fn unit_budgets_are_the_identity() {
        let m = MinskyCostModel::unit([None, Some(0), Some(0), Some(0)]);
        let instants: Vec<BigUint> = [3u32, 10, 77].iter().map(|&n| BigUint::from(n)).collect();
        assert_eq!(predicted_accept_instants_2c(&m, &instants), instants);
    }

    #[test]
    fn unit_budget_overflows_in_the_machine() {
        let spec = SyntheticMachine::new(1, SetSpec::all());
        let m = minsky_two_counter(spec, MinskyCostModel::unit([Some(8); 4]));
        let err = CounterRun::new(&m, None)
            .run(&mut SeededBits::new(1), &Limits::steps(10))
            .unwrap_err();
        assert!(matches!(
            err,
            crate::machine::EngineError::Oracle(OracleError::BudgetOverflow { .. })
        ));
    }

    #[test]
    fn lockstep_with_direct_run() {
        for seed in 0..3 {
            let r = minsky_lockstep(seed, SetSpec::finite([1, 3]), 40).unwrap();
            assert_eq!(r.steps_checked, 40);
            assert!(r.mismatches.is_empty(), "{:?}", r.mismatches);
        }
    }
}
