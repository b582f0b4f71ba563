//! Elementary rule tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::RuleError;

/// An elementary (radius 1, binary) rule stored as its Wolfram code.
///
/// Bit `4*l + 2*c + r` of the code is the output for the neighborhood
/// `(l, c, r)`, so the left neighbor is the most significant input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    table: u8,
}

impl Rule {
    pub const OR: Rule = Rule { table: 254 };
    pub const AND: Rule = Rule { table: 128 };
    pub const NOR: Rule = Rule { table: 1 };
    pub const NAND: Rule = Rule { table: 127 };
    pub const MAJ: Rule = Rule { table: 232 };
    pub const MIN: Rule = Rule { table: 23 };
    pub const FIH: Rule = Rule { table: 77 };
    pub const FUH: Rule = Rule { table: 178 };
    pub const ALL1: Rule = Rule { table: 255 };
    pub const ALL0: Rule = Rule { table: 0 };
    pub const XOR: Rule = Rule { table: 150 };

    pub const fn from_wolfram(code: u8) -> Rule {
        Rule { table: code }
    }

    pub const fn wolfram_code(self) -> u8 {
        self.table
    }

    #[inline]
    pub fn apply(self, l: bool, c: bool, r: bool) -> bool {
        let idx = (l as u8) << 2 | (c as u8) << 1 | r as u8;
        self.table >> idx & 1 == 1
    }

    /// Output for a 3-bit neighborhood value (left neighbor in bit 2).
    #[inline]
    pub fn apply_bits(self, idx: u32) -> bool {
        self.table >> (idx & 7) & 1 == 1
    }

    /// Applies the rule to 64 cells at once given their left neighbors,
    /// values and right neighbors.
    #[inline]
    pub fn apply_words(self, l: u64, c: u64, r: u64) -> u64 {
        // Mux tree over the table, selecting on r, then c, then l.
        let bit = |idx: u8| 0u64.wrapping_sub((self.table >> idx & 1) as u64);
        let sel = |s: u64, one: u64, zero: u64| zero ^ ((one ^ zero) & s);
        let q = |hi: u8| {
            let lo = sel(r, bit(hi + 1), bit(hi));
            let up = sel(r, bit(hi + 3), bit(hi + 2));
            sel(c, up, lo)
        };
        sel(l, q(4), q(0))
    }

    /// The rule obtained by complementing inputs and output.
    pub fn complement(self) -> Rule {
        let mut table = 0u8;
        for idx in 0..8u8 {
            let out = self.table >> (7 - idx) & 1 ^ 1;
            table |= out << idx;
        }
        Rule { table }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match RuleName::from_rule(*self) {
            Some(name) => write!(f, "{name}"),
            None => write!(f, "wolfram:{}", self.table),
        }
    }
}

/// Rules known by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    Or,
    And,
    Nor,
    Nand,
    Maj,
    Min,
    Fih,
    Fuh,
    All1,
    All0,
}

impl RuleName {
    pub const ALL: [RuleName; 10] = [
        RuleName::Or,
        RuleName::And,
        RuleName::Nor,
        RuleName::Nand,
        RuleName::Maj,
        RuleName::Min,
        RuleName::Fih,
        RuleName::Fuh,
        RuleName::All1,
        RuleName::All0,
    ];

    pub fn rule(self) -> Rule {
        match self {
            RuleName::Or => Rule::OR,
            RuleName::And => Rule::AND,
            RuleName::Nor => Rule::NOR,
            RuleName::Nand => Rule::NAND,
            RuleName::Maj => Rule::MAJ,
            RuleName::Min => Rule::MIN,
            RuleName::Fih => Rule::FIH,
            RuleName::Fuh => Rule::FUH,
            RuleName::All1 => Rule::ALL1,
            RuleName::All0 => Rule::ALL0,
        }
    }

    pub fn from_rule(rule: Rule) -> Option<RuleName> {
        RuleName::ALL.into_iter().find(|n| n.rule() == rule)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::Or => "or",
            RuleName::And => "and",
            RuleName::Nor => "nor",
            RuleName::Nand => "nand",
            RuleName::Maj => "maj",
            RuleName::Min => "min",
            RuleName::Fih => "fih",
            RuleName::Fuh => "fuh",
            RuleName::All1 => "all1",
            RuleName::All0 => "all0",
        }
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| RuleError::UnknownRule(s.to_string()))
    }
}

/// Parses a symbolic rule name or `wolfram:<code>`.
pub fn parse_rule(s: &str) -> Result<Rule, RuleError> {
    if let Some(code) = s.strip_prefix("wolfram:") {
        return code
            .parse::<u8>()
            .map(Rule::from_wolfram)
            .map_err(|_| RuleError::UnknownRule(s.to_string()));
    }
    s.parse::<RuleName>().map(RuleName::rule)
}
