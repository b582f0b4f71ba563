//! Bit-packed cyclic configurations.

use std::fmt;
use std::str::FromStr;

use crate::rules::Pattern;
use crate::{CoreError, Ring, Rule};

const WORD: usize = 64;

/// One time slice: a cyclic binary string of length `n >= 3`.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `n` in the
/// last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    n: usize,
    words: Vec<u64>,
}

impl Configuration {
    pub fn zeros(n: usize) -> Result<Configuration, CoreError> {
        Ring::new(n)?;
        Ok(Configuration {
            n,
            words: vec![0; n.div_ceil(WORD)],
        })
    }

    pub fn ones(n: usize) -> Result<Configuration, CoreError> {
        let mut c = Configuration::zeros(n)?;
        c.words.iter_mut().for_each(|w| *w = u64::MAX);
        c.mask_tail();
        Ok(c)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Configuration, CoreError> {
        let mut c = Configuration::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            c.set(i, b);
        }
        Ok(c)
    }

    /// Low `n` bits of `value`, bit `i` of the integer becoming location `i`.
    pub fn from_u64(n: usize, value: u64) -> Result<Configuration, CoreError> {
        let mut c = Configuration::zeros(n)?;
        c.words[0] = value;
        c.mask_tail();
        Ok(c)
    }

    /// Inverse of `from_u64`; only meaningful for `n <= 64`.
    pub fn to_u64(&self) -> u64 {
        self.words[0]
    }

    pub fn from_words(n: usize, words: Vec<u64>) -> Result<Configuration, CoreError> {
        Ring::new(n)?;
        if words.len() != n.div_ceil(WORD) {
            return Err(CoreError::Format(format!(
                "expected {} words for n = {n}, got {}",
                n.div_ceil(WORD),
                words.len()
            )));
        }
        let mut c = Configuration { n, words };
        c.mask_tail();
        Ok(c)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.n).expect("length checked at construction")
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    /// `get` with wraparound for arbitrary signed indices.
    #[inline]
    pub fn get_wrapped(&self, i: i64) -> bool {
        self.get(i.rem_euclid(self.n as i64) as usize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        let (w, s) = (i / WORD, i % WORD);
        if b {
            self.words[w] |= 1 << s;
        } else {
            self.words[w] &= !(1 << s);
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    /// The `(2r+1)`-pattern centered at `i`, leftmost location first.
    pub fn window(&self, i: usize, r: usize) -> Pattern {
        let mut bits = 0u32;
        for d in 0..=2 * r {
            let j = i as i64 + d as i64 - r as i64;
            bits = bits << 1 | self.get_wrapped(j) as u32;
        }
        Pattern::new(bits, 2 * r + 1)
    }

    pub fn complement(&self) -> Configuration {
        let mut c = Configuration {
            n: self.n,
            words: self.words.iter().map(|w| !w).collect(),
        };
        c.mask_tail();
        c
    }

    pub fn xor(&self, other: &Configuration) -> Configuration {
        debug_assert_eq!(self.n, other.n);
        Configuration {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming(&self, other: &Configuration) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(|i| self.get(i))
    }

    fn mask_tail(&mut self) {
        let rem = self.n % WORD;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }

    /// Word-parallel copy where location `i` holds the value of `i - 1`.
    fn left_neighbors(&self) -> Vec<u64> {
        let nw = self.words.len();
        let last_bit = self.get(self.n - 1) as u64;
        let mut out = vec![0u64; nw];
        for w in 0..nw {
            let carry = if w == 0 {
                last_bit
            } else {
                self.words[w - 1] >> 63
            };
            out[w] = self.words[w] << 1 | carry;
        }
        out
    }

    /// Word-parallel copy where location `i` holds the value of `i + 1`.
    fn right_neighbors(&self) -> Vec<u64> {
        let nw = self.words.len();
        let mut out = vec![0u64; nw];
        for w in 0..nw {
            let next = if w + 1 < nw { self.words[w + 1] & 1 } else { 0 };
            out[w] = self.words[w] >> 1 | next << 63;
        }
        let top = (self.n - 1) % WORD;
        let last = nw - 1;
        out[last] &= !(1u64 << top);
        out[last] |= (self.words[0] & 1) << top;
        out
    }

    /// One synchronous application of `rule` at every location.
    pub fn evolve_step(&self, rule: Rule) -> Configuration {
        let l = self.left_neighbors();
        let r = self.right_neighbors();
        let words = self
            .words
            .iter()
            .zip(l.iter().zip(&r))
            .map(|(&c, (&l, &r))| rule.apply_words(l, c, r))
            .collect();
        let mut out = Configuration { n: self.n, words };
        out.mask_tail();
        out
    }
}

/// `evolve_step` for rings that fit in one word, bit `i` being location `i`.
#[inline]
pub fn evolve_small(x: u64, n: usize, rule: Rule) -> u64 {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let l = (x << 1 | x >> (n - 1)) & mask;
    let r = (x >> 1 | (x & 1) << (n - 1)) & mask;
    rule.apply_words(l, x, r) & mask
}

impl serde::Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Configuration {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CoreError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Configuration::from_bits(&bits)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 128 {
            write!(f, "Configuration({self})")
        } else {
            write!(f, "Configuration(n = {}, ones = {})", self.n, self.count_ones())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_step(c: &Configuration, rule: Rule) -> Configuration {
        let n = c.len() as i64;
        let bits: Vec<bool> = (0..n)
            .map(|i| rule.apply(c.get_wrapped(i - 1), c.get_wrapped(i), c.get_wrapped(i + 1)))
            .collect();
        Configuration::from_bits(&bits).unwrap()
    }

    #[test]
    fn majority_step() {
        let c: Configuration = "0010011100".parse().unwrap();
        assert_eq!(c.evolve_step(Rule::MAJ).to_string(), "0000011100");
        let alt: Configuration = "0101010101".parse().unwrap();
        assert_eq!(alt.evolve_step(Rule::MAJ).to_string(), "1010101010");
    }

    #[test]
    fn short_configurations_rejected() {
        assert!("01".parse::<Configuration>().is_err());
        assert!(Configuration::zeros(2).is_err());
    }

    #[test]
    fn word_boundaries() {
        for n in [3usize, 63, 64, 65, 127, 128, 129, 200] {
            let mut c = Configuration::zeros(n).unwrap();
            for i in (0..n).step_by(3) {
                c.set(i, true);
            }
            c.set(n - 1, true);
            for rule in [Rule::MAJ, Rule::FIH, Rule::XOR, Rule::from_wolfram(110)] {
                assert_eq!(c.evolve_step(rule), naive_step(&c, rule), "n = {n}");
            }
        }
    }

    #[test]
    fn small_matches_packed() {
        for n in 3..=12usize {
            for x in 0..(1u64 << n) {
                let c = Configuration::from_u64(n, x).unwrap();
                for rule in [Rule::MAJ, Rule::FUH] {
                    assert_eq!(evolve_small(x, n, rule), c.evolve_step(rule).to_u64());
                }
            }
        }
    }

    #[test]
    fn windows_wrap() {
        let c: Configuration = "1000000001".parse().unwrap();
        assert_eq!(c.window(0, 1).to_string(), "110");
        assert_eq!(c.window(9, 1).to_string(), "011");
        assert_eq!(c.window(5, 0).to_string(), "0");
    }
}
