//! Unary families given by length recurrences.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coin::SetSpec;

/// The two unary families; the `i`-th member is `a^{k_i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnaryFamily {
    /// `k_1 = 64·28`, `k_i = k_{i-1} + 64^i·(18i + 10)`.
    Ulog,
    /// `k_1 = 128`, `k_i = k_{i-1} + 6·8^i + 2·64^i`.
    Up4ca,
}

impl UnaryFamily {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFamily::Ulog => "ulog",
            UnaryFamily::Up4ca => "up4ca",
        }
    }

    pub fn first(self) -> BigUint {
        match self {
            UnaryFamily::Ulog => BigUint::from(64u32 * 28),
            UnaryFamily::Up4ca => BigUint::from(128u32),
        }
    }

    /// `k_i - k_{i-1}` for `i ≥ 2`.
    pub fn increment(self, i: u32) -> BigUint {
        let p64 = BigUint::from(64u32).pow(i);
        match self {
            UnaryFamily::Ulog => p64 * (18 * i + 10),
            UnaryFamily::Up4ca => BigUint::from(8u32).pow(i) * 6u32 + p64 * 2u32,
        }
    }

    /// `[k_1, ..., k_max_i]`.
    pub fn lengths(self, max_i: u32) -> Vec<BigUint> {
        let mut out = Vec::with_capacity(max_i as usize);
        let mut k = BigUint::zero();
        for i in 1..=max_i {
            k = if i == 1 { self.first() } else { k + self.increment(i) };
            out.push(k.clone());
        }
        out
    }
}

impl fmt::Display for UnaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UnaryFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ulog" => Ok(UnaryFamily::Ulog),
            "up4ca" | "u4pca" => Ok(UnaryFamily::Up4ca),
            other => Err(format!("unknown unary family `{other}` (ulog or up4ca)")),
        }
    }
}

pub fn ulog_lengths(max_i: u32) -> Vec<BigUint> {
    UnaryFamily::Ulog.lengths(max_i)
}

pub fn up4ca_lengths(max_i: u32) -> Vec<BigUint> {
    UnaryFamily::Up4ca.lengths(max_i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Membership {
    InFamilyAndInI(u32),
    InFamilyOnly(u32),
    NotInFamily,
}

impl Membership {
    pub fn index(self) -> Option<u32> {
        match self {
            Membership::InFamilyAndInI(i) | Membership::InFamilyOnly(i) => Some(i),
            Membership::NotInFamily => None,
        }
    }
}

/// Where `a^n` sits relative to the family and to `I`.
pub fn classify_unary(n: &BigUint, family: UnaryFamily, set: &SetSpec) -> Membership {
    let mut k = family.first();
    let mut i = 1u32;
    while &k < n {
        i += 1;
        k += family.increment(i);
    }
    if &k != n {
        Membership::NotInFamily
    } else if set.contains(u64::from(i)) {
        Membership::InFamilyAndInI(i)
    } else {
        Membership::InFamilyOnly(i)
    }
}

/// Binary representation of a positive integer, most significant digit first.
pub fn bin_str(i: &BigUint) -> String {
    assert!(*i >= BigUint::one(), "bin is defined for positive integers");
    i.to_str_radix(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn ulog_values() {
        assert_eq!(ulog_lengths(1), vec![big(1792)]);
        assert_eq!(ulog_lengths(3), vec![big(1792), big(190_208), big(16_967_424)]);
    }

    #[test]
    fn up4ca_values() {
        assert_eq!(up4ca_lengths(1), vec![big(128)]);
        assert_eq!(up4ca_lengths(3), vec![big(128), big(8704), big(536_064)]);
    }

    #[test]
    fn ulog_64_closed_form() {
        // Independent evaluation: k_n = 1792 + sum_{i=2}^{n} 64^i (18 i + 10),
        // accumulated term by term with the power kept separately.
        let last = ulog_lengths(64).pop().unwrap();
        let mut total = big(1792);
        let mut p = big(64);
        for i in 2..=64u64 {
            p *= 64u32;
            total += &p * big(18 * i + 10);
        }
        assert_eq!(last, total);
        assert!(last.to_string().len() > 100);
    }

    #[test]
    fn classification() {
        let set = SetSpec::finite([1, 5]);
        assert_eq!(classify_unary(&big(1792), UnaryFamily::Ulog, &set), Membership::InFamilyAndInI(1));
        assert_eq!(classify_unary(&big(1793), UnaryFamily::Ulog, &set), Membership::NotInFamily);
        assert_eq!(
            classify_unary(&big(190_208), UnaryFamily::Ulog, &SetSpec::finite([1])),
            Membership::InFamilyOnly(2)
        );
        assert_eq!(classify_unary(&big(0), UnaryFamily::Up4ca, &set), Membership::NotInFamily);
        assert_eq!(classify_unary(&big(8704), UnaryFamily::Up4ca, &set), Membership::InFamilyOnly(2));
    }

    #[test]
    fn bin_examples() {
        assert_eq!(bin_str(&big(1)), "1");
        assert_eq!(bin_str(&big(5)), "101");
        assert_eq!(bin_str(&big(64)), "1000000");
    }
}
