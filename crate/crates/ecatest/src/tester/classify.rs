//! Classification of sample pairs against the grid, and the per-class
//! violation predicates.

use std::fmt;

use serde::Serialize;

use super::grid::{GridIntervals, GridView, Run, Topology};
use crate::rules::{Parity, Pattern, RuleMeta, Side};
use crate::{Ring, TesterError};

/// Which region a sample pair falls in. Locations are ring positions and
/// `reference` is a grid index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairClass {
    /// Deep inside a final grid interval (or anywhere in an all-final grid).
    A { g1: Option<usize>, g2: Option<usize> },
    /// Near a flank of a final grid interval.
    B { g1: usize, g2: usize, side: Side, reference: usize },
    /// Far from every final grid interval.
    C { g1: Option<usize>, g2: Option<usize>, reference: usize },
    /// No prediction.
    U,
}

impl PairClass {
    pub fn letter(&self) -> char {
        match self {
            PairClass::A { .. } => 'A',
            PairClass::B { .. } => 'B',
            PairClass::C { .. } => 'C',
            PairClass::U => 'U',
        }
    }
}

/// The requirement a violating pair fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Requirement {
    /// Window at `t2` final.
    A1,
    /// Window at `t` final.
    A2,
    /// Center at `t` matches the prediction from `t2`.
    A3,
    B1,
    /// Center at `t` matches the prediction from the reference grid point.
    B2,
    /// Window at `t` non-final.
    C1,
    /// Window at `t` equals the transport of the reference window.
    C2,
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Classifies pairs `(t, i)` with `t2 < t` for one grid.
pub struct Classifier<'a> {
    gv: &'a GridView,
    gi: &'a GridIntervals,
    ring: Ring,
    t1: usize,
    t2: usize,
    margin: usize,
}

impl<'a> Classifier<'a> {
    /// `margin` is the flank margin (see `Params::flank_margin`).
    pub fn new(gv: &'a GridView, gi: &'a GridIntervals, t2: usize, margin: usize) -> Classifier<'a> {
        Classifier {
            gv,
            gi,
            ring: gv.ring(),
            t1: gv.t1(),
            t2,
            margin,
        }
    }

    fn bounds(&self, r: &Run) -> (usize, usize) {
        (self.gv.pos(r.first), self.gv.pos(r.last))
    }

    /// Run containing `i` between its end points, if any.
    fn run_at(&self, i: usize) -> Option<usize> {
        let idx = self.gv.at_or_before(i)?;
        let r = self.gi.run_of(idx);
        let (g1, g2) = self.bounds(&self.gi.runs[r]);
        self.ring.in_interval(i, g1, g2).then_some(r)
    }

    fn check_domain(&self, t: usize, i: usize) -> Result<(), TesterError> {
        if t <= self.t2 || i >= self.ring.len() {
            return Err(TesterError::Domain { t, i });
        }
        if self.gv.topology() == Topology::Segment {
            let reach = t - self.t1;
            let first = self.gv.pos(0);
            let last = self.gv.pos(self.gv.len() - 1);
            if i < first + reach || i + reach > last {
                return Err(TesterError::Domain { t, i });
            }
        }
        Ok(())
    }

    pub fn classify(&self, t: usize, i: usize) -> Result<PairClass, TesterError> {
        self.check_domain(t, i)?;
        Ok(self
            .class_a(i)
            .or_else(|| self.class_b(t, i))
            .or_else(|| self.class_c(t, i))
            .unwrap_or(PairClass::U))
    }

    /// Membership in each of A, B and C, evaluated independently.
    pub fn predicates(&self, t: usize, i: usize) -> Result<[bool; 3], TesterError> {
        self.check_domain(t, i)?;
        Ok([
            self.class_a(i).is_some(),
            self.class_b(t, i).is_some(),
            self.class_c(t, i).is_some(),
        ])
    }

    fn class_a(&self, i: usize) -> Option<PairClass> {
        match self.gi.homogeneous {
            Some(true) => return Some(PairClass::A { g1: None, g2: None }),
            Some(false) => return None,
            None => {}
        }
        let run = self.gi.runs[self.run_at(i)?];
        let (g1, g2) = self.bounds(&run);
        (run.is_final && self.ring.ddist(g1, i) >= self.t1 && self.ring.ddist(i, g2) >= self.t1).then_some(
            PairClass::A {
                g1: Some(g1),
                g2: Some(g2),
            },
        )
    }

    fn class_b(&self, t: usize, i: usize) -> Option<PairClass> {
        if self.gi.homogeneous.is_some() || self.t1 < self.margin {
            return None;
        }
        let base = match self.gv.at_or_before(i) {
            Some(idx) => self.gi.run_of(idx),
            None => 0,
        };
        let mut candidates: Vec<usize> = (-2..=2)
            .filter_map(|s| self.gi.neighbor(base, s, self.gv.topology()))
            .filter(|&r| self.gi.runs[r].is_final)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates.into_iter().find_map(|r| {
            [Side::Left, Side::Right]
                .into_iter()
                .find_map(|side| self.flank(t, i, r, side))
        })
    }

    /// Offset `o` in `[lo, hi]` with `from + o` congruent to `i`.
    fn offset_in(&self, from: usize, i: usize, lo: i64, hi: i64) -> Option<i64> {
        let n = self.ring.len() as i64;
        let so = self.ring.signed_offset(from, i);
        [so - n, so, so + n].into_iter().find(|o| (lo..=hi).contains(o))
    }

    fn flank(&self, t: usize, i: usize, r: usize, side: Side) -> Option<PairClass> {
        let run = self.gi.runs[r];
        let (g1, g2) = self.bounds(&run);
        let reach = (t - self.t1) as i64;
        let inner = self.t1 as i64 - self.margin as i64 - 1;
        let topo = self.gv.topology();
        // Offsets along the ring from the flank's end point.
        let o = match side {
            Side::Left if !run.open_left => self.offset_in(g1, i, -reach, inner)?,
            Side::Right if !run.open_right => self.offset_in(g2, i, -inner, reach)?,
            _ => return None,
        };
        let d_self = o.abs();
        // Another final interval must be clearly farther from i.
        let (competitor, spacing) = match (side, self.gi.neighbor(r, if side == Side::Left { -2 } else { 2 }, topo)) {
            (Side::Left, Some(q)) => {
                let last = self.gi.runs[q].last;
                (-(self.ring.ddist(self.gv.pos(last), g1) as i64), self.gv.spacing_after(last))
            }
            (Side::Right, Some(q)) => {
                let first = self.gi.runs[q].first;
                (self.ring.ddist(g2, self.gv.pos(first)) as i64, self.gv.spacing_before(first))
            }
            // Open segment: an unseen final cell may sit just past the end.
            (Side::Left, None) => (self.gv.pos(0) as i64 - 1 - g1 as i64, 1),
            (Side::Right, None) => (self.gv.pos(self.gv.len() - 1) as i64 + 1 - g2 as i64, 1),
        };
        let gap = (competitor - o) * competitor.signum();
        if d_self + spacing as i64 >= gap {
            return None;
        }
        let reference = self.flank_reference(i, &run)?;
        Some(PairClass::B { g1, g2, side, reference })
    }

    /// Closest grid point to `i` within `t1 - margin` of either end of the
    /// run, ties going to the one closer to the run's left end.
    fn flank_reference(&self, i: usize, run: &Run) -> Option<usize> {
        let (g1, g2) = self.bounds(run);
        let len = self.ring.ddist(g1, g2);
        let w = self.t1 - self.margin;
        let gv = self.gv;
        let le = |p: usize| gv.at_or_before(p);
        let mut cands = vec![Some(run.first), Some(run.last)];
        for p in [i, self.ring.offset(g1, w as i64), self.ring.offset(g2, -(w as i64))] {
            let idx = le(p);
            cands.push(idx);
            cands.push(idx.and_then(|j| gv.next_idx(j)));
        }
        cands
            .into_iter()
            .flatten()
            .filter(|&j| self.gi.run_of(j) == self.gi.run_of(run.first))
            .filter(|&j| {
                let o = self.ring.ddist(g1, gv.pos(j));
                o <= len && (o <= w || o + w >= len)
            })
            .min_by_key(|&j| (self.ring.dist(i, gv.pos(j)), self.ring.ddist(g1, gv.pos(j))))
    }

    fn class_c(&self, t: usize, i: usize) -> Option<PairClass> {
        let reach = t - self.t1;
        // A final run grown over t1 steps could hide between grid points.
        if self.t1 < self.margin {
            return None;
        }
        let (run, g1, g2) = match self.gi.homogeneous {
            Some(true) => return None,
            Some(false) => (None, None, None),
            None => {
                let run = self.gi.runs[self.run_at(i)?];
                if run.is_final {
                    return None;
                }
                let (g1, g2) = self.bounds(&run);
                let left_ok = run.open_left || self.ring.dist(i, self.ring.offset(g1, 1)) > reach;
                let right_ok = run.open_right || self.ring.dist(i, self.ring.offset(g2, -1)) > reach;
                if !(left_ok && right_ok) {
                    return None;
                }
                (Some(run), Some(g1), Some(g2))
            }
        };
        let idx = self.gv.at_or_before(i)?;
        let mut reference = idx;
        let at_end = run.is_some_and(|r| r.last == idx);
        if let (false, Some(next)) = (at_end, self.gv.next_idx(idx)) {
            if self.ring.dist(i, self.gv.pos(next)) < self.ring.dist(i, self.gv.pos(idx)) {
                reference = next;
            }
        }
        Some(PairClass::C { g1, g2, reference })
    }
}

/// Checks the class requirements for one sampled pair. Returns the first
/// failed requirement, if any.
#[allow(clippy::too_many_arguments)]
pub fn violation_check(
    meta: &RuleMeta,
    class: &PairClass,
    t: usize,
    i: usize,
    t2: usize,
    window_t: Pattern,
    window_t2: Pattern,
    gv: &GridView,
) -> Result<Option<Requirement>, TesterError> {
    let ring = gv.ring();
    let t1 = gv.t1();
    match *class {
        PairClass::A { .. } => {
            if !meta.is_final(window_t2) {
                return Ok(Some(Requirement::A1));
            }
            if !meta.is_final(window_t) {
                return Ok(Some(Requirement::A2));
            }
            let predicted = meta.f_fwd(window_t2.center(), Parity::of(t - t2), Parity::EVEN);
            Ok((window_t.center() != predicted).then_some(Requirement::A3))
        }
        PairClass::B { reference, .. } => {
            if !meta.is_final(window_t) {
                return Ok(Some(Requirement::B1));
            }
            let d = ring.dist(gv.pos(reference), i);
            let predicted = meta.f_fwd(gv.center(reference), Parity::of(t - t1), Parity::of(d));
            Ok((window_t.center() != predicted).then_some(Requirement::B2))
        }
        PairClass::C { reference, .. } => {
            if meta.is_final(window_t) {
                return Ok(Some(Requirement::C1));
            }
            let g = gv.pos(reference);
            let expected = meta.h_fwd(gv.window(reference), Parity::of(t - t1), ring.signed_offset(g, i))?;
            Ok((window_t != expected).then_some(Requirement::C2))
        }
        PairClass::U => Err(TesterError::Domain { t, i }),
    }
}
