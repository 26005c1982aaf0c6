//! Binary floating point with a fixed 256-bit mantissa, truncating.
//!
//! Every operation result is within a relative `2^(1-PRECISION)` of the exact
//! one and never above it.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

pub const PRECISION: u64 = 256;

/// `mant · 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    mant: BigUint,
    exp: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat {
            mant: BigUint::zero(),
            exp: 0,
        }
    }

    /// `n · 2^exp`.
    pub fn new(n: BigUint, exp: i64) -> Self {
        Self::norm(n, exp)
    }

    fn norm(mut mant: BigUint, mut exp: i64) -> Self {
        let bits = mant.bits();
        if bits > PRECISION {
            let shift = bits - PRECISION;
            mant >>= shift;
            exp += shift as i64;
        }
        BigFloat { mant, exp }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn mul(&self, o: &BigFloat) -> BigFloat {
        Self::norm(&self.mant * &o.mant, self.exp + o.exp)
    }

    pub fn mul_int(&self, n: &BigUint) -> BigFloat {
        Self::norm(&self.mant * n, self.exp)
    }

    pub fn div_int(&self, d: &BigUint) -> BigFloat {
        let shift = PRECISION + d.bits();
        Self::norm((&self.mant << shift) / d, self.exp - shift as i64)
    }

    pub fn powi(&self, mut n: u64) -> BigFloat {
        let mut base = self.clone();
        let mut acc = BigFloat::new(BigUint::from(1u32), 0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn add(&self, o: &BigFloat) -> BigFloat {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let gap = (hi.exp - lo.exp) as u64;
        if gap > 2 * PRECISION + lo.mant.bits() {
            // `lo` is below the last kept bit of the sum.
            return hi.clone();
        }
        Self::norm((&hi.mant << gap) + &lo.mant, lo.exp)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let shift = bits.saturating_sub(60);
        let top = (&self.mant >> shift).to_f64().unwrap_or(0.0);
        let e = self.exp + shift as i64;
        if e < -2000 {
            return 0.0;
        }
        top * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }
}
