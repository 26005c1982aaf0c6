//! Symbolic transition weights.
//!
//! A weight is a product of factors, each of which is a branch of a fair bit
//! or of a biased coin. An outcome list is well formed when its weights form a
//! complete binary decision tree over those factors, which is exactly the
//! condition that they sum to one. No floating point is involved anywhere.

use std::fmt;

use smallvec::SmallVec;

use super::random::BitSource;
use crate::coin::{Coin, CoinError};

pub type CoinId = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    /// Probability 1/2. The flag is the fair-bit value that selects this branch.
    Half(bool),
    Heads(CoinId),
    Tails(CoinId),
}

/// Product of factors; the empty product is the certain weight 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Weight(SmallVec<[Factor; 2]>);

impl Weight {
    pub fn one() -> Self {
        Weight(SmallVec::new())
    }

    pub fn half(bit: bool) -> Self {
        Weight::one().times(Factor::Half(bit))
    }

    pub fn heads(coin: CoinId) -> Self {
        Weight::one().times(Factor::Heads(coin))
    }

    pub fn tails(coin: CoinId) -> Self {
        Weight::one().times(Factor::Tails(coin))
    }

    pub fn times(mut self, f: Factor) -> Self {
        self.0.push(f);
        self
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, factor) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            match factor {
                Factor::Half(_) => f.write_str("1/2")?,
                Factor::Heads(c) => write!(f, "p{c}")?,
                Factor::Tails(c) => write!(f, "(1-p{c})")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch<A> {
    pub weight: Weight,
    pub action: A,
}

impl<A> Branch<A> {
    pub fn certain(action: A) -> Self {
        Branch {
            weight: Weight::one(),
            action,
        }
    }

    pub fn new(weight: Weight, action: A) -> Self {
        Branch { weight, action }
    }
}

pub type Outcomes<A> = SmallVec<[Branch<A>; 2]>;

/// Why an outcome list fails to sum to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightViolation {
    /// No outcome at all.
    Empty,
    /// A branch at this depth has no complementary branch.
    Unpaired { depth: usize, factor: Factor },
    /// Two different kinds of random choice at the same depth.
    Mixed { depth: usize },
    /// Several outcomes share the same complete weight.
    Overlap { depth: usize },
}

impl fmt::Display for WeightViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightViolation::Empty => f.write_str("no outcomes"),
            WeightViolation::Unpaired { depth, factor } => {
                write!(f, "factor {factor:?} at depth {depth} has no complement")
            }
            WeightViolation::Mixed { depth } => write!(f, "mixed factor kinds at depth {depth}"),
            WeightViolation::Overlap { depth } => {
                write!(f, "outcomes overlap after {depth} factors")
            }
        }
    }
}

fn complement(f: Factor) -> Factor {
    match f {
        Factor::Half(b) => Factor::Half(!b),
        Factor::Heads(c) => Factor::Tails(c),
        Factor::Tails(c) => Factor::Heads(c),
    }
}

fn same_choice(a: Factor, b: Factor) -> bool {
    match (a, b) {
        (Factor::Half(_), Factor::Half(_)) => true,
        (Factor::Heads(x) | Factor::Tails(x), Factor::Heads(y) | Factor::Tails(y)) => x == y,
        _ => false,
    }
}

/// Checks that the weights form a complete decision tree.
pub fn check_weights(weights: &[&Weight]) -> Result<(), WeightViolation> {
    match weights {
        [] => Err(WeightViolation::Empty),
        [w] if w.is_one() => Ok(()),
        [a, b] if a.0.len() == 1 && b.0.len() == 1 => {
            let (fa, fb) = (a.0[0], b.0[0]);
            if !same_choice(fa, fb) {
                Err(WeightViolation::Mixed { depth: 0 })
            } else if fb != complement(fa) {
                Err(WeightViolation::Unpaired { depth: 0, factor: fa })
            } else {
                Ok(())
            }
        }
        _ => {
            let lists: Vec<&[Factor]> = weights.iter().map(|w| w.factors()).collect();
            check_tree(&lists, 0)
        }
    }
}

fn check_tree(lists: &[&[Factor]], depth: usize) -> Result<(), WeightViolation> {
    if lists.len() == 1 && lists[0].len() == depth {
        return Ok(());
    }
    if lists.iter().any(|l| l.len() == depth) {
        return Err(WeightViolation::Overlap { depth });
    }
    let first = lists[0][depth];
    if lists.iter().any(|l| !same_choice(l[depth], first)) {
        return Err(WeightViolation::Mixed { depth });
    }
    let (left, right): (Vec<&[Factor]>, Vec<&[Factor]>) =
        lists.iter().partition(|l| l[depth] == first);
    if right.is_empty() {
        return Err(WeightViolation::Unpaired {
            depth,
            factor: first,
        });
    }
    check_tree(&left, depth + 1)?;
    check_tree(&right, depth + 1)
}

/// Random events consumed while resolving outcome lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DrawCounts {
    pub fair_bits: u64,
    pub coin_flips: u64,
}

/// Picks one outcome of a well-formed list, walking its decision tree.
pub fn resolve<A, R: BitSource + ?Sized>(
    outcomes: &[Branch<A>],
    coins: &[Coin],
    rng: &mut R,
    counts: &mut DrawCounts,
) -> Result<usize, CoinError> {
    if outcomes.len() == 1 {
        return Ok(0);
    }
    let mut alive: SmallVec<[usize; 8]> = (0..outcomes.len()).collect();
    let mut depth = 0;
    loop {
        if alive.len() == 1 && outcomes[alive[0]].weight.0.len() == depth {
            return Ok(alive[0]);
        }
        let chosen = match outcomes[alive[0]].weight.0[depth] {
            Factor::Half(_) => {
                counts.fair_bits += 1;
                Factor::Half(rng.next_bit())
            }
            Factor::Heads(c) | Factor::Tails(c) => {
                counts.coin_flips += 1;
                if coins[c as usize].flip(rng)? {
                    Factor::Heads(c)
                } else {
                    Factor::Tails(c)
                }
            }
        };
        alive.retain(|i| outcomes[*i].weight.0.get(depth) == Some(&chosen));
        depth += 1;
    }
}
