//! Unbiased bit streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A stream of fair bits. Machines and coins only ever consume single bits.
pub trait BitSource {
    fn next_bit(&mut self) -> bool;
    /// Number of bits handed out so far.
    fn drawn(&self) -> u64;
}

/// ChaCha8-backed stream. Trial `t` of an experiment with master seed `s` uses
/// stream number `t` of the generator keyed by `s`, so trials never share bits.
#[derive(Clone, Debug)]
pub struct SeededBits {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
    drawn: u64,
}

impl SeededBits {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trial);
        SeededBits {
            rng,
            word: 0,
            left: 0,
            drawn: 0,
        }
    }
}

impl BitSource for SeededBits {
    #[inline]
    fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        self.drawn += 1;
        bit
    }

    fn drawn(&self) -> u64 {
        self.drawn
    }
}

/// A fixed script of bits; once exhausted it keeps repeating its last bit
/// (or `false` for an empty script).
#[derive(Clone, Debug)]
pub struct ScriptedBits {
    bits: Vec<bool>,
    pos: usize,
    drawn: u64,
}

impl ScriptedBits {
    pub fn new(bits: Vec<bool>) -> Self {
        ScriptedBits {
            bits,
            pos: 0,
            drawn: 0,
        }
    }

    /// Always the same bit.
    pub fn constant(bit: bool) -> Self {
        Self::new(vec![bit])
    }
}

impl BitSource for ScriptedBits {
    fn next_bit(&mut self) -> bool {
        self.drawn += 1;
        match self.bits.get(self.pos) {
            Some(&b) => {
                self.pos += 1;
                b
            }
            None => self.bits.last().copied().unwrap_or(false),
        }
    }

    fn drawn(&self) -> u64 {
        self.drawn
    }
}

impl<B: BitSource + ?Sized> BitSource for &mut B {
    fn next_bit(&mut self) -> bool {
        (**self).next_bit()
    }

    fn drawn(&self) -> u64 {
        (**self).drawn()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prefix(src: &mut impl BitSource, n: usize) -> Vec<bool> {
        (0..n).map(|_| src.next_bit()).collect()
    }

    #[test]
    fn same_seed_same_stream() {
        let a = prefix(&mut SeededBits::new(9), 500);
        let b = prefix(&mut SeededBits::new(9), 500);
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ() {
        let a = prefix(&mut SeededBits::substream(9, 0), 256);
        let b = prefix(&mut SeededBits::substream(9, 1), 256);
        let c = prefix(&mut SeededBits::substream(10, 0), 256);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn script_repeats_last_bit() {
        let mut s = ScriptedBits::new(vec![true, false]);
        assert_eq!(prefix(&mut s, 4), [true, false, false, false]);
        assert_eq!(s.drawn(), 4);
    }
}
