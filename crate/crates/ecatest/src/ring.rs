//! Index arithmetic on the cyclic ring `Z_n`.

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// The ring of locations `0..n` with wraparound arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ring {
    n: usize,
}

impl Ring {
    /// Rings shorter than 3 cannot host a 3-window and are rejected.
    pub fn new(n: usize) -> Result<Ring, CoreError> {
        if n < 3 {
            return Err(CoreError::InvalidConfiguration { n });
        }
        Ok(Ring { n })
    }

    pub fn len(self) -> usize {
        self.n
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Reduces an arbitrary signed index into `0..n`.
    pub fn wrap(self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    /// `i + d`, wrapped.
    pub fn offset(self, i: usize, d: i64) -> usize {
        self.wrap(i as i64 + d)
    }

    /// Directed distance from `i` to `j`, i.e. `(j - i) mod n`.
    pub fn ddist(self, i: usize, j: usize) -> usize {
        (j + self.n - i % self.n) % self.n
    }

    /// Undirected ring distance, at most `n / 2`.
    pub fn dist(self, i: usize, j: usize) -> usize {
        let d = self.ddist(i, j);
        d.min(self.n - d)
    }

    /// Shortest signed displacement from `from` to `to`, in `(-n/2, n/2]`.
    pub fn signed_offset(self, from: usize, to: usize) -> i64 {
        let d = self.ddist(from, to) as i64;
        let n = self.n as i64;
        if 2 * d > n {
            d - n
        } else {
            d
        }
    }

    /// The wrapped interval `[i - r, i + r]` in left-to-right order.
    pub fn neighborhood(self, i: usize, r: usize) -> Result<Vec<usize>, CoreError> {
        if 2 * r + 1 > self.n {
            return Err(CoreError::InvalidRadius { r, n: self.n });
        }
        Ok((0..=2 * r)
            .map(|j| self.offset(i, j as i64 - r as i64))
            .collect())
    }

    /// Whether `i` lies on the wrapped interval `[x, y]`.
    ///
    /// `x == y` denotes the single location `x`.
    pub fn in_interval(self, i: usize, x: usize, y: usize) -> bool {
        self.ddist(x, i) <= self.ddist(x, y)
    }

    /// Locations of `[x, y]` in order. `x == y` denotes the whole ring
    /// starting at `x`, matching the degenerate interval of the finalization
    /// constructor.
    pub fn interval_or_ring(self, x: usize, y: usize) -> Vec<usize> {
        let len = if x == y { self.n } else { self.ddist(x, y) + 1 };
        (0..len).map(|j| (x + j) % self.n).collect()
    }
}

/// A cell `(t, i)` of an environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeLocation {
    pub t: usize,
    pub i: usize,
}

impl TimeLocation {
    pub fn new(t: usize, i: usize) -> TimeLocation {
        TimeLocation { t, i }
    }
}

/// `child` descends from `ancestor` when it is strictly later and within the
/// light cone: `dist(i, i') <= t - t'`.
pub fn descends(ring: Ring, child: TimeLocation, ancestor: TimeLocation) -> bool {
    child.t > ancestor.t && ring.dist(child.i, ancestor.i) <= child.t - ancestor.t
}
