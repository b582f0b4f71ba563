use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{CoreError, RuleError};

/// A window of `len` consecutive cells, leftmost cell in the most
/// significant position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    bits: u32,
    len: u8,
}

impl Pattern {
    pub fn new(bits: u32, len: usize) -> Pattern {
        debug_assert!((1..=31).contains(&len));
        Pattern {
            bits: bits & ((1u32 << len) - 1),
            len: len as u8,
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Cell `j`, counting from the left starting at 0.
    pub fn bit(self, j: usize) -> bool {
        self.bits >> (self.len() - 1 - j) & 1 == 1
    }

    pub fn center(self) -> bool {
        self.bit(self.len() / 2)
    }

    pub fn complement(self) -> Pattern {
        Pattern::new(!self.bits, self.len())
    }

    /// The `width`-cell sub-window starting at cell `start`.
    pub fn sub(self, start: usize, width: usize) -> Pattern {
        let shift = self.len() - start - width;
        Pattern::new(self.bits >> shift, width)
    }

    pub fn all(len: usize) -> impl Iterator<Item = Pattern> {
        (0..1u32 << len).map(move |b| Pattern::new(b, len))
    }

    pub fn expect_len(self, expected: usize) -> Result<Pattern, RuleError> {
        if self.len() == expected {
            Ok(self)
        } else {
            Err(RuleError::PatternLength {
                got: self.len(),
                expected,
            })
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len() {
            f.write_str(if self.bit(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.len() > 31 {
            return Err(CoreError::Format(format!("bad pattern {s:?}")));
        }
        let mut bits = 0u32;
        for ch in s.chars() {
            bits = bits << 1
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(CoreError::InvalidBit(other)),
                };
        }
        Ok(Pattern::new(bits, s.len()))
    }
}

/// A bit standing for `x mod 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Parity(pub bool);

impl Parity {
    pub const EVEN: Parity = Parity(false);
    pub const ODD: Parity = Parity(true);

    pub fn of(x: usize) -> Parity {
        Parity(x % 2 == 1)
    }

    pub fn of_signed(x: i64) -> Parity {
        Parity(x.rem_euclid(2) == 1)
    }

    pub fn bit(self) -> bool {
        self.0
    }
}

impl BitXor for Parity {
    type Output = Parity;

    fn bitxor(self, rhs: Parity) -> Parity {
        Parity(self.0 ^ rhs.0)
    }
}
