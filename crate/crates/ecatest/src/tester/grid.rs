//! The queried partial configuration at time `t1` and its maximal runs.

use serde::Serialize;

use crate::rules::{Pattern, RuleMeta};
use crate::{Configuration, Ring, TesterError};

/// Whether grid coordinates wrap around the ring, or form one open segment
/// of a larger ring (the interval variant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Topology {
    Ring,
    Segment,
}

/// Windows `E_{t1}(Gamma_k(g))` for every grid location `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridView {
    n: usize,
    k: usize,
    t1: usize,
    topology: Topology,
    points: Vec<usize>,
    windows: Vec<Pattern>,
}

/// Fixed cells of a grid view, as a contiguous stretch starting at `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellView {
    pub start: usize,
    pub cells: Vec<Option<bool>>,
    pub cyclic: bool,
}

/// Two windows disagree on a shared cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub location: usize,
}

impl GridView {
    pub fn new(
        n: usize,
        k: usize,
        t1: usize,
        topology: Topology,
        points: Vec<usize>,
        windows: Vec<Pattern>,
    ) -> Result<GridView, TesterError> {
        if points.is_empty() || points.len() != windows.len() {
            return Err(TesterError::Params("grid needs one window per point".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) || *points.last().expect("nonempty") >= n {
            return Err(TesterError::Params("grid points must be increasing and inside the ring".into()));
        }
        if windows.iter().any(|w| w.len() != 2 * k + 1) {
            return Err(TesterError::Params("window width must be 2k+1".into()));
        }
        if topology == Topology::Segment && (points[0] < k || points[points.len() - 1] + k >= n) {
            return Err(TesterError::Params("segment windows may not wrap".into()));
        }
        Ok(GridView {
            n,
            k,
            t1,
            topology,
            points,
            windows,
        })
    }

    /// The grid view a configuration induces.
    pub fn from_configuration(
        config: &Configuration,
        k: usize,
        t1: usize,
        topology: Topology,
        points: Vec<usize>,
    ) -> Result<GridView, TesterError> {
        let windows = points.iter().map(|&g| config.window(g, k)).collect();
        GridView::new(config.len(), k, t1, topology, points, windows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t1(&self) -> usize {
        self.t1
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.n).expect("n >= 3")
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn windows(&self) -> &[Pattern] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pos(&self, idx: usize) -> usize {
        self.points[idx]
    }

    pub fn window(&self, idx: usize) -> Pattern {
        self.windows[idx]
    }

    pub fn center(&self, idx: usize) -> bool {
        self.windows[idx].center()
    }

    pub fn next_idx(&self, idx: usize) -> Option<usize> {
        if idx + 1 < self.len() {
            Some(idx + 1)
        } else if self.topology == Topology::Ring {
            Some(0)
        } else {
            None
        }
    }

    pub fn prev_idx(&self, idx: usize) -> Option<usize> {
        if idx > 0 {
            Some(idx - 1)
        } else if self.topology == Topology::Ring {
            Some(self.len() - 1)
        } else {
            None
        }
    }

    /// Distance from grid point `idx` to the next one (0 past a segment end).
    pub fn spacing_after(&self, idx: usize) -> usize {
        self.next_idx(idx)
            .map_or(0, |j| self.ring().ddist(self.points[idx], self.points[j]))
    }

    pub fn spacing_before(&self, idx: usize) -> usize {
        self.prev_idx(idx)
            .map_or(0, |j| self.ring().ddist(self.points[j], self.points[idx]))
    }

    pub fn max_spacing(&self) -> usize {
        (0..self.len()).map(|j| self.spacing_after(j)).max().unwrap_or(0)
    }

    /// The grid point at or before `i` (cyclically on a ring). `None` before
    /// the first point of a segment.
    pub fn at_or_before(&self, i: usize) -> Option<usize> {
        let p = self.points.partition_point(|&g| g <= i);
        if p > 0 {
            Some(p - 1)
        } else if self.topology == Topology::Ring {
            Some(self.len() - 1)
        } else {
            None
        }
    }

    /// Cells covered by the windows, or the first conflicting location.
    pub fn cells(&self) -> Result<CellView, Conflict> {
        let k = self.k as i64;
        let (start, len, cyclic) = match self.topology {
            Topology::Ring => (0, self.n, true),
            Topology::Segment => {
                let lo = self.points[0] - self.k;
                let hi = self.points[self.len() - 1] + self.k;
                (lo, hi - lo + 1, false)
            }
        };
        let mut cells = vec![None; len];
        for (&g, w) in self.points.iter().zip(&self.windows) {
            for d in -k..=k {
                let loc = (g as i64 + d).rem_euclid(self.n as i64) as usize;
                let slot = (loc + self.n - start) % self.n;
                let bit = w.bit((d + k) as usize);
                match cells[slot] {
                    Some(b) if b != bit => return Err(Conflict { location: loc }),
                    _ => cells[slot] = Some(bit),
                }
            }
        }
        Ok(CellView { start, cells, cyclic })
    }
}

/// A maximal run of consecutive grid points with the same finality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub is_final: bool,
    /// Grid index of the leftmost point.
    pub first: usize,
    /// Grid index of the rightmost point (may precede `first` when wrapping).
    pub last: usize,
    /// The run touches the left end of a segment, so its true extent is unknown.
    pub open_left: bool,
    pub open_right: bool,
}

/// The alternating maximal runs of a grid view.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridIntervals {
    /// Runs in left-to-right order (cyclic on a ring). Empty when homogeneous.
    pub runs: Vec<Run>,
    /// `Some(f)` when every grid window has finality `f`.
    pub homogeneous: Option<bool>,
    /// Run index of every grid point.
    run_of: Vec<usize>,
}

impl GridIntervals {
    pub fn run_of(&self, idx: usize) -> usize {
        self.run_of[idx]
    }

    pub fn final_runs(&self) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(|r| r.is_final)
    }

    pub fn non_final_runs(&self) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(|r| !r.is_final)
    }

    /// Run index `steps` runs away from `r` (negative goes left), if it exists.
    pub fn neighbor(&self, r: usize, steps: i64, topology: Topology) -> Option<usize> {
        let len = self.runs.len() as i64;
        let j = r as i64 + steps;
        match topology {
            Topology::Ring => Some(j.rem_euclid(len) as usize),
            Topology::Segment => (0..len).contains(&j).then_some(j as usize),
        }
    }
}

/// Splits the grid into maximal final and non-final runs.
pub fn grid_intervals(meta: &RuleMeta, gv: &GridView) -> GridIntervals {
    let fin: Vec<bool> = gv.windows().iter().map(|&w| meta.is_final(w)).collect();
    let len = fin.len();
    if fin.iter().all(|&f| f == fin[0]) {
        return GridIntervals {
            runs: Vec::new(),
            homogeneous: Some(fin[0]),
            run_of: vec![0; len],
        };
    }
    let mut runs = Vec::new();
    let mut run_of = vec![0; len];
    match gv.topology() {
        Topology::Ring => {
            // Start at a point whose predecessor differs.
            let start = (0..len).find(|&j| fin[(j + len - 1) % len] != fin[j]).expect("not homogeneous");
            let mut first = start;
            for s in 1..=len {
                let j = (start + s) % len;
                let prev = (j + len - 1) % len;
                if s == len || fin[j] != fin[prev] {
                    runs.push(Run {
                        is_final: fin[first],
                        first,
                        last: prev,
                        open_left: false,
                        open_right: false,
                    });
                    first = j;
                }
            }
        }
        Topology::Segment => {
            let mut first = 0;
            for j in 1..=len {
                if j == len || fin[j] != fin[j - 1] {
                    runs.push(Run {
                        is_final: fin[first],
                        first,
                        last: j - 1,
                        open_left: first == 0,
                        open_right: j == len,
                    });
                    first = j;
                }
            }
        }
    }
    for (r, run) in runs.iter().enumerate() {
        let mut j = run.first;
        loop {
            run_of[j] = r;
            if j == run.last {
                break;
            }
            j = (j + 1) % len;
        }
    }
    GridIntervals {
        runs,
        homogeneous: None,
        run_of,
    }
}
