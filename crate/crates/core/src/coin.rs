//! The set-encoded coin.
//!
//! A set `I` of positive integers is stored in the bias
//! `p_I = 0.x1 0 1 x2 0 1 x3 0 1 ...` (binary), where `x_t = 1` iff `t ∈ I`.
//! Flips compare fresh uniform bits against the expansion lazily, so a flip
//! usually looks at two or three digits of `p_I`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::random::BitSource;

/// Default number of uniform bits a single flip may consume.
pub const DEFAULT_BIT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Empty,
    All,
    Evens,
    Odds,
    Primes,
    Squares,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Empty,
        Preset::All,
        Preset::Evens,
        Preset::Odds,
        Preset::Primes,
        Preset::Squares,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Empty => "empty",
            Preset::All => "all",
            Preset::Evens => "evens",
            Preset::Odds => "odds",
            Preset::Primes => "primes",
            Preset::Squares => "squares",
        }
    }

    fn contains(self, t: u64) -> bool {
        match self {
            Preset::Empty => false,
            Preset::All => true,
            Preset::Evens => t.is_multiple_of(2),
            Preset::Odds => t % 2 == 1,
            Preset::Primes => is_small_prime(t),
            Preset::Squares => {
                let r = t.sqrt();
                r * r == t
            }
        }
    }
}

fn is_small_prime(t: u64) -> bool {
    if t < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= t {
        if t.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A finitely described subset of the positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetSpec {
    Finite(BTreeSet<u64>),
    /// `x_1 x_2 ...` is `prefix` followed by `period` repeated forever.
    Periodic { prefix: Vec<bool>, period: Vec<bool> },
    Preset(Preset),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetSpecError {
    #[error("unknown set kind `{0}` (expected finite, periodic or preset)")]
    UnknownKind(String),
    #[error("bad element `{0}` in finite set (positive integers only)")]
    BadElement(String),
    #[error("periodic set needs prefix=<bits>,period=<bits> with a nonempty period")]
    BadPeriodic,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl SetSpec {
    pub fn finite<I: IntoIterator<Item = u64>>(items: I) -> Self {
        SetSpec::Finite(items.into_iter().collect())
    }

    pub fn empty() -> Self {
        SetSpec::Preset(Preset::Empty)
    }

    pub fn all() -> Self {
        SetSpec::Preset(Preset::All)
    }

    /// Membership bit `x_t`.
    pub fn contains(&self, t: u64) -> bool {
        if t == 0 {
            return false;
        }
        match self {
            SetSpec::Finite(s) => s.contains(&t),
            SetSpec::Periodic { prefix, period } => {
                let i = (t - 1) as usize;
                if i < prefix.len() {
                    prefix[i]
                } else {
                    period[(i - prefix.len()) % period.len()]
                }
            }
            SetSpec::Preset(p) => p.contains(t),
        }
    }
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

impl FromStr for SetSpec {
    type Err = SetSpecError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let (kind, body) = text.split_once(':').unwrap_or((text, ""));
        match kind {
            "finite" => {
                let mut set = BTreeSet::new();
                for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match item.parse::<u64>() {
                        Ok(v) if v > 0 => {
                            set.insert(v);
                        }
                        _ => return Err(SetSpecError::BadElement(item.to_string())),
                    }
                }
                Ok(SetSpec::Finite(set))
            }
            "periodic" => {
                let mut prefix = None;
                let mut period = None;
                for field in body.split(',') {
                    match field.split_once('=') {
                        Some(("prefix", v)) => prefix = parse_bits(v),
                        Some(("period", v)) => period = parse_bits(v),
                        _ => return Err(SetSpecError::BadPeriodic),
                    }
                }
                match (prefix, period) {
                    (Some(prefix), Some(period)) if !period.is_empty() => {
                        Ok(SetSpec::Periodic { prefix, period })
                    }
                    (None, Some(period)) if !period.is_empty() => Ok(SetSpec::Periodic {
                        prefix: Vec::new(),
                        period,
                    }),
                    _ => Err(SetSpecError::BadPeriodic),
                }
            }
            "preset" => Preset::ALL
                .into_iter()
                .find(|p| p.name() == body)
                .map(SetSpec::Preset)
                .ok_or_else(|| SetSpecError::UnknownPreset(body.to_string())),
            other => Err(SetSpecError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        match self {
            SetSpec::Finite(s) => {
                let items: Vec<String> = s.iter().map(u64::to_string).collect();
                write!(f, "finite:{}", items.join(","))
            }
            SetSpec::Periodic { prefix, period } => {
                write!(f, "periodic:prefix={},period={}", bits(prefix), bits(period))
            }
            SetSpec::Preset(p) => write!(f, "preset:{}", p.name()),
        }
    }
}

impl Serialize for SetSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SetSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `bit(j)` of `p_I`, for `j ≥ 1`.
pub fn p_bit(set: &SetSpec, j: u64) -> bool {
    assert!(j >= 1, "expansion digits are numbered from 1");
    match j % 3 {
        1 => set.contains(j.div_ceil(3)),
        2 => false,
        _ => true,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoinError {
    #[error("coin flip used {0} uniform bits without deciding")]
    BitBudgetExceeded(u64),
}

/// The coin of bias `p_I` together with a per-flip bit budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coin {
    set: SetSpec,
    budget: u64,
}

impl Coin {
    pub fn new(set: SetSpec) -> Self {
        Coin {
            set,
            budget: DEFAULT_BIT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn set(&self) -> &SetSpec {
        &self.set
    }

    pub fn bit(&self, j: u64) -> bool {
        p_bit(&self.set, j)
    }

    /// One flip; `true` means heads, which happens with probability exactly `p_I`.
    ///
    /// Reads uniform bits `u_1 u_2 ...` until the first `j` with `u_j != bit(j)`
    /// and answers heads iff `u_j < bit(j)`.
    pub fn flip<R: BitSource + ?Sized>(&self, rng: &mut R) -> Result<bool, CoinError> {
        for j in 1..=self.budget {
            let u = rng.next_bit();
            let b = self.bit(j);
            if u != b {
                return Ok(b);
            }
        }
        Err(CoinError::BitBudgetExceeded(self.budget))
    }

    pub fn truncate(&self, m: u32) -> Dyadic {
        truncate_p(&self.set, m)
    }
}

/// Heads with probability `p_I`, using the default bit budget.
pub fn flip<R: BitSource + ?Sized>(set: &SetSpec, rng: &mut R) -> Result<bool, CoinError> {
    Coin::new(set.clone()).flip(rng)
}

/// The number `numer / 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub numer: BigUint,
    pub bits: u32,
}

impl Dyadic {
    pub fn to_f64(&self) -> f64 {
        let shift = self.numer.bits().saturating_sub(60);
        let top = (&self.numer >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powi(shift as i32 - self.bits as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }
}

/// The first `m` expansion digits of `p_I` as `a / 2^m`; the true value lies in
/// `[a/2^m, a/2^m + 2^-m]`.
pub fn truncate_p(set: &SetSpec, m: u32) -> Dyadic {
    assert!(m >= 1, "truncation needs at least one bit");
    let mut numer = BigUint::zero();
    for j in 1..=u64::from(m) {
        numer <<= 1u32;
        if p_bit(set, j) {
            numer += 1u32;
        }
    }
    Dyadic { numer, bits: m }
}
