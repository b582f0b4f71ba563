//! Exact feasibility of a grid view: does some configuration reachable in
//! `t1` steps agree with every queried window?
//!
//! Reachable sets are described by [`ImageModel`]; both shapes reduce to a
//! finite automaton over the cells, run once around the ring.

use serde::Serialize;

use super::grid::{CellView, GridView};
use crate::rules::{ImageModel, RuleMeta};
use crate::TesterError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InfeasibleReason {
    /// Overlapping windows disagree at this location.
    Conflict { location: usize },
    /// The windows are consistent but no reachable configuration matches them.
    NoCompletion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Feasibility {
    Feasible,
    Infeasible(InfeasibleReason),
}

impl Feasibility {
    pub fn is_feasible(self) -> bool {
        self == Feasibility::Feasible
    }
}

pub fn check_feasible(meta: &RuleMeta, gv: &GridView) -> Result<Feasibility, TesterError> {
    let cells = match gv.cells() {
        Ok(c) => c,
        Err(c) => {
            return Ok(Feasibility::Infeasible(InfeasibleReason::Conflict { location: c.location }));
        }
    };
    let ok = match meta.image_model() {
        ImageModel::Runs { target } => runs_feasible(&cells, target, gv.t1()),
        ImageModel::Gaps { marker_is_change } => GapAutomaton::new(gv.t1(), marker_is_change).feasible(&cells),
        ImageModel::Unknown => {
            return Err(TesterError::Unsupported(format!(
                "no image model for {}",
                meta.name()
            )))
        }
    };
    Ok(if ok {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible(InfeasibleReason::NoCompletion)
    })
}

/// Whether a partial configuration extends to one where every maximal run
/// of `target` bounded by the other value has length at least `2t + 1`.
pub fn runs_feasible(cells: &CellView, target: bool, t: usize) -> bool {
    let cap = 2 * t + 1;
    let step = |reach: &[bool], cell: Option<bool>| {
        let mut next = vec![false; cap + 1];
        for (r, _) in reach.iter().enumerate().filter(|(_, &on)| on) {
            if cell != Some(!target) {
                next[(r + 1).min(cap)] = true;
            }
            if cell != Some(target) && (r == 0 || r >= cap) {
                next[0] = true;
            }
        }
        next
    };
    let v = &cells.cells;
    if cells.cyclic {
        let n = v.len();
        let Some(s) = v.iter().position(|&c| c == Some(!target)) else {
            return true;
        };
        let mut reach = vec![false; cap + 1];
        reach[0] = true;
        for d in 1..=n {
            reach = step(&reach, v[(s + d) % n]);
        }
        reach[0]
    } else {
        let mut reach = vec![false; cap + 1];
        reach[cap] = true;
        for &cell in v {
            reach = step(&reach, cell);
        }
        reach.iter().any(|&on| on)
    }
}

/// Walk flavors: how the cut edge between the last and first cell is handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cut {
    /// The cut edge is a marker; `zw` guesses that the gap just before it is empty.
    Marker { zw: bool },
    /// The cut edge is a filler inside some gap `G*`. The walk first counts
    /// the fillers of `G*` to the right of the cut, then carries the least
    /// left-hand count `G*` still needs.
    Filler,
    /// Open segment; the outside is unconstrained.
    Linear,
}

// `ext` values for Cut::Marker.
const IN_FIRST_GAP: u8 = 0;
const FIRST_GAP_EMPTY: u8 = 1;
const FIRST_GAP_FULL: u8 = 2;
// `ext` values for Cut::Filler.
const COUNTING: u8 = 0;
const JUST_MARKED: u8 = 1;
const CARRYING: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct State {
    ext: u8,
    y: bool,
    /// The previous gap is empty.
    zl: bool,
    /// The previous gap cannot afford the current one being empty.
    pend: bool,
    c: usize,
}

const UNREACHED: i32 = i32::MAX;

/// Automaton for the gap model with horizon `t`.
struct GapAutomaton {
    t: usize,
    cap: usize,
    marker_is_change: bool,
}

impl GapAutomaton {
    fn new(t: usize, marker_is_change: bool) -> GapAutomaton {
        GapAutomaton {
            t,
            cap: 2 * t + 1,
            marker_is_change,
        }
    }

    fn index(&self, s: State) -> usize {
        ((((s.ext as usize) * 2 + s.y as usize) * 2 + s.zl as usize) * 2 + s.pend as usize) * (self.cap + 1) + s.c
    }

    fn decode(&self, mut idx: usize) -> State {
        let c = idx % (self.cap + 1);
        idx /= self.cap + 1;
        let pend = idx % 2 == 1;
        idx /= 2;
        let zl = idx % 2 == 1;
        idx /= 2;
        let y = idx % 2 == 1;
        State {
            ext: (idx / 2) as u8,
            y,
            zl,
            pend,
            c,
        }
    }

    fn size(&self) -> usize {
        3 * 8 * (self.cap + 1)
    }

    fn is_marker(&self, a: bool, b: bool) -> bool {
        (a != b) == self.marker_is_change
    }

    /// Closes the current gap at a marker: `(zl, pend)` for the next gap.
    fn close(&self, s: &State) -> Option<(bool, bool)> {
        if s.c == 0 {
            (!s.pend).then_some((true, false))
        } else {
            let need = 1 + self.t * s.zl as usize;
            (s.c >= need).then_some((false, s.c < need + self.t))
        }
    }

    fn plain(&self, s: State, marker: bool) -> Option<State> {
        if marker {
            let (zl, pend) = self.close(&s)?;
            Some(State { zl, pend, c: 0, ..s })
        } else {
            Some(State {
                c: (s.c + 1).min(self.cap),
                pend: false,
                ..s
            })
        }
    }

    fn transition(&self, cut: Cut, s: State, val: i32, marker: bool) -> Option<(State, i32)> {
        let t = self.t as i32;
        match (cut, s.ext) {
            (Cut::Marker { .. }, IN_FIRST_GAP) if marker => {
                let (zl, pend) = self.close(&s)?;
                let ext = if s.c == 0 { FIRST_GAP_EMPTY } else { FIRST_GAP_FULL };
                Some((State { ext, zl, pend, c: 0, ..s }, val))
            }
            (Cut::Filler, COUNTING) => {
                if marker {
                    Some((State { ext: JUST_MARKED, ..s }, val))
                } else {
                    Some((State { c: (s.c + 1).min(self.cap), ..s }, val))
                }
            }
            (Cut::Filler, JUST_MARKED) => {
                let cr = s.c as i32;
                let (d, c, zl) = if marker { (t - cr, 0, true) } else { (-cr, 1, false) };
                let next = State {
                    ext: CARRYING,
                    zl,
                    pend: false,
                    c,
                    ..s
                };
                Some((next, d.max(-t)))
            }
            _ => self.plain(s, marker).map(|n| (n, val)),
        }
    }

    /// Whether a walk ending in `s` closes the ring consistently.
    fn closes(&self, cut: Cut, s: &State, val: i32, y0: bool) -> bool {
        let t = self.t;
        match cut {
            Cut::Marker { zw } => {
                if !self.is_marker(s.y, y0) {
                    return false;
                }
                match s.ext {
                    IN_FIRST_GAP => !zw && s.c >= 1,
                    _ if s.c == 0 => zw && !s.pend,
                    ext => !zw && s.c >= 1 + t * s.zl as usize + t * (ext == FIRST_GAP_EMPTY) as usize,
                }
            }
            Cut::Filler => {
                if self.is_marker(s.y, y0) {
                    return false;
                }
                s.ext != CARRYING || val <= s.c as i32 - (t * s.zl as usize) as i32
            }
            Cut::Linear => true,
        }
    }

    /// Runs the automaton over `walk` (cells after the first), starting from `init`.
    fn run(&self, cut: Cut, init: &[State], walk: impl Iterator<Item = Option<bool>>) -> Vec<(State, i32)> {
        let mut cur = vec![UNREACHED; self.size()];
        let mut next = vec![UNREACHED; self.size()];
        let mut active: Vec<usize> = Vec::new();
        let mut next_active: Vec<usize> = Vec::new();
        for &s in init {
            let idx = self.index(s);
            if cur[idx] == UNREACHED {
                active.push(idx);
            }
            cur[idx] = 0;
        }
        for cell in walk {
            for &idx in &active {
                let s = self.decode(idx);
                let val = cur[idx];
                for y in [false, true] {
                    if cell.is_some_and(|b| b != y) {
                        continue;
                    }
                    let marker = self.is_marker(s.y, y);
                    if let Some((ns, nv)) = self.transition(cut, State { y, ..s }, val, marker) {
                        let ni = self.index(ns);
                        if next[ni] == UNREACHED {
                            next_active.push(ni);
                        }
                        next[ni] = next[ni].min(nv);
                    }
                }
            }
            for &idx in &active {
                cur[idx] = UNREACHED;
            }
            std::mem::swap(&mut cur, &mut next);
            std::mem::swap(&mut active, &mut next_active);
            next_active.clear();
            if active.is_empty() {
                break;
            }
        }
        active.iter().map(|&i| (self.decode(i), cur[i])).collect()
    }

    fn feasible(&self, cells: &CellView) -> bool {
        let v = &cells.cells;
        let allowed = |c: Option<bool>| [false, true].into_iter().filter(move |&y| c.is_none_or(|b| b == y));
        if !cells.cyclic {
            let init: Vec<State> = allowed(v[0])
                .map(|y| State {
                    ext: 0,
                    y,
                    zl: false,
                    pend: false,
                    c: self.cap,
                })
                .collect();
            return !self.run(Cut::Linear, &init, v[1..].iter().copied()).is_empty();
        }
        let n = v.len();
        // Cut between cells s and s+1, preferring an edge whose type is known.
        let known = |s: usize| v[s].zip(v[(s + 1) % n]).map(|(a, b)| self.is_marker(a, b));
        let s = (0..n)
            .find(|&s| known(s) == Some(true))
            .or_else(|| (0..n).find(|&s| known(s).is_some()))
            .unwrap_or(n - 1);
        let cuts: Vec<Cut> = match known(s) {
            Some(true) => vec![Cut::Marker { zw: false }, Cut::Marker { zw: true }],
            Some(false) => vec![Cut::Filler],
            None => vec![Cut::Marker { zw: false }, Cut::Marker { zw: true }, Cut::Filler],
        };
        let first = (s + 1) % n;
        for cut in cuts {
            for y0 in allowed(v[first]) {
                let zl = matches!(cut, Cut::Marker { zw: true });
                let init = [State {
                    ext: 0,
                    y: y0,
                    zl,
                    pend: false,
                    c: 0,
                }];
                let walk = (2..=n).map(|d| v[(s + d) % n]);
                if self
                    .run(cut, &init, walk)
                    .iter()
                    .any(|(st, val)| self.closes(cut, st, *val, y0))
                {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{builtin_meta, Pattern};
    use crate::tester::grid::Topology;
    use crate::RuleName;

    fn view(n: usize, t1: usize, windows: &[(usize, &str)]) -> GridView {
        let points = windows.iter().map(|w| w.0).collect();
        let pats = windows.iter().map(|w| w.1.parse::<Pattern>().unwrap()).collect();
        GridView::new(n, 1, t1, Topology::Ring, points, pats).unwrap()
    }

    #[test]
    fn all_ones_majority() {
        let maj = builtin_meta(RuleName::Maj).unwrap();
        let gv = view(30, 5, &[(0, "111"), (10, "111"), (20, "111")]);
        assert_eq!(check_feasible(&maj, &gv).unwrap(), Feasibility::Feasible);
    }

    #[test]
    fn short_final_interval() {
        // A final window flanked by non-final ones needs a run of 2*t1+1.
        let maj = builtin_meta(RuleName::Maj).unwrap();
        let gv = view(40, 6, &[(0, "010"), (6, "111"), (12, "101")]);
        assert_eq!(
            check_feasible(&maj, &gv).unwrap(),
            Feasibility::Infeasible(InfeasibleReason::NoCompletion)
        );
        let gv = view(40, 2, &[(0, "010"), (6, "111"), (12, "101")]);
        assert!(check_feasible(&maj, &gv).unwrap().is_feasible());
    }

    #[test]
    fn conflict() {
        let maj = builtin_meta(RuleName::Maj).unwrap();
        let gv = view(12, 1, &[(0, "010"), (1, "000")]);
        assert_eq!(
            check_feasible(&maj, &gv).unwrap(),
            Feasibility::Infeasible(InfeasibleReason::Conflict { location: 0 })
        );
    }
}
