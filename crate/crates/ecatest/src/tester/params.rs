//! Grid spacing, probe times, grid locations and sample counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::TesterError;

/// Tuning constants. `b3..b5` only matter for the interval variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
}

impl Constants {
    pub const PAPER: Constants = Constants {
        b0: 48.0,
        b1: 15.0,
        b2: 3.0,
        b3: 32.0,
        b4: 4.0,
        b5: 8.0,
    };
    pub const PAPER_WIDE: Constants = Constants {
        b0: 84.0,
        b1: 20.0,
        b2: 3.0,
        b3: 32.0,
        b4: 4.0,
        b5: 8.0,
    };
    pub const LAB: Constants = Constants {
        b0: 4.0,
        b1: 2.0,
        b2: 3.0,
        b3: 2.0,
        b4: 4.0,
        b5: 8.0,
    };
    pub const LAB_WIDE: Constants = Constants {
        b0: 4.0,
        b1: 2.0,
        b2: 3.0,
        b3: 2.0,
        b4: 4.0,
        b5: 8.0,
    };
}

/// Named constant sets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Paper,
    Lab,
}

impl Profile {
    pub fn constants(self) -> Constants {
        match self {
            Profile::Paper => Constants::PAPER,
            Profile::Lab => Constants::LAB,
        }
    }

    pub fn wide_constants(self) -> Constants {
        match self {
            Profile::Paper => Constants::PAPER_WIDE,
            Profile::Lab => Constants::LAB_WIDE,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Paper => "paper",
            Profile::Lab => "lab",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = TesterError;

    fn from_str(s: &str) -> Result<Profile, TesterError> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Profile::Paper),
            "lab" => Ok(Profile::Lab),
            other => Err(TesterError::Params(format!("unknown profile {other:?}"))),
        }
    }
}

const SLACK: f64 = 1e-9;

// Rounding that ignores floating-point noise, so 0.1^2 * 9600 / 48 floors to 2.
pub(crate) fn floor_tol(x: f64) -> usize {
    (x + SLACK).floor().max(0.0) as usize
}

pub(crate) fn ceil_tol(x: f64) -> usize {
    (x - SLACK).ceil().max(0.0) as usize
}

/// Parameters of one run of the grid tester.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub constants: Constants,
    pub delta: usize,
    pub t1: usize,
    pub t2: usize,
    pub grid: Vec<usize>,
    pub s: usize,
}

impl Params {
    /// Margin used by the flank set: at least `delta`, and at least one less
    /// than the largest grid spacing.
    pub fn flank_margin(&self, max_spacing: usize) -> usize {
        self.delta.max(max_spacing.saturating_sub(1))
    }

    /// Exact query count of a grid run with window radius `k`.
    pub fn query_budget(&self, k: usize) -> u64 {
        let w = (2 * k + 1) as u64;
        w * self.grid.len() as u64 + 2 * w * self.s as u64
    }
}

/// Parameters of the direct small-instance tester.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FallbackParams {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub s: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Plan {
    Grid(Params),
    Fallback(FallbackParams),
}

pub(crate) fn validate(n: usize, m: usize, eps: f64) -> Result<(), TesterError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TesterError::Params(format!("eps must lie in (0, 1), got {eps}")));
    }
    if n < 3 {
        return Err(TesterError::Params(format!("n must be at least 3, got {n}")));
    }
    if m < 2 {
        return Err(TesterError::Params(format!("m must be at least 2, got {m}")));
    }
    Ok(())
}

/// Sample count `ceil(2 b2 / eps)`.
pub fn sample_count(eps: f64, c: &Constants) -> usize {
    ceil_tol(2.0 * c.b2 / eps).max(1)
}

/// `floor(n / |G|)`-or-`ceil` spaced grid of `count` points starting at `lo`
/// across a stretch of `len` cells.
pub fn spread_grid(lo: usize, len: usize, count: usize) -> Vec<usize> {
    (0..count).map(|j| lo + j * len / count).collect()
}

pub fn plan(n: usize, m: usize, eps: f64, c: &Constants) -> Result<Plan, TesterError> {
    validate(n, m, eps)?;
    let s = sample_count(eps, c);
    let delta = floor_tol(eps * eps * n.min(m) as f64 / c.b0).max(1);
    let t1 = ceil_tol(c.b1 * delta as f64 / eps);
    let t2 = t1 + delta;
    if t2 + 1 >= m || delta > n {
        return Ok(Plan::Fallback(FallbackParams { n, m, eps, s }));
    }
    let count = n / delta;
    Ok(Plan::Grid(Params {
        n,
        m,
        eps,
        constants: *c,
        delta,
        t1,
        t2,
        grid: spread_grid(0, n, count),
        s,
    }))
}
