//! The testers: query schedules, decisions and verdicts.

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use super::classify::{violation_check, Classifier, PairClass, Requirement};
use super::feasible::{check_feasible, Feasibility, InfeasibleReason};
use super::grid::{grid_intervals, GridView, Topology};
use super::params::{ceil_tol, floor_tol, plan, sample_count, validate, Constants, Plan};
use crate::oracle::{QueryOracle, QueryStats};
use crate::rules::{Pattern, RuleMeta, TrivialRule};
use crate::{Configuration, Rule, TesterError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Grid,
    Wide,
    Fallback,
    Trivial,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Grid => "grid",
            Variant::Wide => "wide",
            Variant::Fallback => "fallback",
            Variant::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    /// The queried grid has no feasible completion. `interval` indexes the
    /// selected interval in the wide variant.
    InfeasibleGrid {
        reason: InfeasibleReason,
        interval: Option<usize>,
    },
    Violation {
        t: usize,
        i: usize,
        class: PairClass,
        requirement: Requirement,
    },
    /// A sampled bit differs from the value forced by the queried data.
    Mismatch { t: usize, i: usize },
    /// A window at a time `t >= 1` that no evolution can produce.
    Forbidden { t: usize, i: usize, window: Pattern },
}

impl RejectReason {
    /// Short label: the pair class letter and requirement where applicable.
    pub fn label(&self) -> String {
        match self {
            RejectReason::InfeasibleGrid { .. } => "infeasible".into(),
            RejectReason::Violation { class, requirement, .. } => format!("{}:{requirement}", class.letter()),
            RejectReason::Mismatch { .. } => "mismatch".into(),
            RejectReason::Forbidden { .. } => "forbidden".into(),
        }
    }
}

/// Derived parameters reported with a verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlanSummary {
    pub delta: Option<usize>,
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub grid_points: Option<usize>,
    pub samples: usize,
    pub interval_len: Option<usize>,
    pub intervals: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub decision: Decision,
    pub reason: Option<RejectReason>,
    pub variant: Variant,
    /// Set when the requested variant handed the instance to another one.
    pub delegated_from: Option<Variant>,
    pub plan: PlanSummary,
    pub stats: QueryStats,
}

impl Verdict {
    fn new(reason: Option<RejectReason>, variant: Variant, plan: PlanSummary, oracle: &QueryOracle) -> Verdict {
        Verdict {
            decision: if reason.is_some() {
                Decision::Reject
            } else {
                Decision::Accept
            },
            reason,
            variant,
            delegated_from: None,
            plan,
            stats: oracle.stats(),
        }
    }

    fn delegated(mut self, from: Variant) -> Verdict {
        self.delegated_from.get_or_insert(from);
        self
    }

    pub fn accepted(&self) -> bool {
        self.decision == Decision::Accept
    }
}

fn fresh(oracle: &QueryOracle) -> Result<(), TesterError> {
    if oracle.time_floor() != 0 || oracle.stats().total != 0 {
        return Err(TesterError::Params("oracle already used".into()));
    }
    Ok(())
}

/// One grid plus its sample pairs.
struct Unit {
    topology: Topology,
    points: Vec<usize>,
    samples: Vec<(usize, usize)>,
}

struct GridRun {
    t1: usize,
    t2: usize,
    delta: usize,
}

/// Queries all grids at `t1`, checks feasibility, then queries every sample
/// at `t2` (ascending location) and at `t` (ascending time), and checks them.
fn run_units(
    oracle: &mut QueryOracle,
    meta: &RuleMeta,
    run: &GridRun,
    units: &[Unit],
) -> Result<Option<RejectReason>, TesterError> {
    let (n, k) = (oracle.n(), meta.k());
    let mut views = Vec::with_capacity(units.len());
    for u in units {
        let windows = u
            .points
            .iter()
            .map(|&g| oracle.query_window(run.t1, g, k))
            .collect::<Result<Vec<_>, _>>()?;
        views.push(GridView::new(n, k, run.t1, u.topology, u.points.clone(), windows)?);
    }
    for (j, gv) in views.iter().enumerate() {
        if let Feasibility::Infeasible(reason) = check_feasible(meta, gv)? {
            let interval = (units[j].topology == Topology::Segment).then_some(j);
            return Ok(Some(RejectReason::InfeasibleGrid { reason, interval }));
        }
    }
    // (unit, sample) in query order.
    let mut order: Vec<(usize, usize)> = units
        .iter()
        .enumerate()
        .flat_map(|(u, unit)| (0..unit.samples.len()).map(move |s| (u, s)))
        .collect();
    let sample = |(u, s): (usize, usize)| units[u].samples[s];
    order.sort_by_key(|&us| (sample(us).1, us));
    let mut at_t2 = vec![Vec::new(); units.len()];
    for (u, unit) in units.iter().enumerate() {
        at_t2[u] = vec![None; unit.samples.len()];
    }
    for &(u, s) in &order {
        let (_, i) = units[u].samples[s];
        at_t2[u][s] = Some(oracle.query_window(run.t2, i, k)?);
    }
    order.sort_by_key(|&us| (sample(us), us));
    let mut at_t = Vec::with_capacity(order.len());
    for &(u, s) in &order {
        let (t, i) = units[u].samples[s];
        at_t.push(oracle.query_window(t, i, k)?);
    }
    let intervals: Vec<_> = views.iter().map(|gv| grid_intervals(meta, gv)).collect();
    let classifiers: Vec<Classifier> = views
        .iter()
        .zip(&intervals)
        .map(|(gv, gi)| Classifier::new(gv, gi, run.t2, run.delta.max(gv.max_spacing().saturating_sub(1))))
        .collect();
    for (&(u, s), &window_t) in order.iter().zip(&at_t) {
        let gv = &views[u];
        let (t, i) = units[u].samples[s];
        let class = classifiers[u].classify(t, i)?;
        if class == PairClass::U {
            continue;
        }
        let window_t2 = at_t2[u][s].expect("queried above");
        if let Some(requirement) = violation_check(meta, &class, t, i, run.t2, window_t, window_t2, gv)? {
            return Ok(Some(RejectReason::Violation {
                t,
                i,
                class,
                requirement,
            }));
        }
    }
    Ok(None)
}

/// The grid tester. Small instances go to [`test_fallback`].
pub fn test<R: Rng + ?Sized>(
    oracle: &mut QueryOracle,
    meta: &RuleMeta,
    eps: f64,
    constants: &Constants,
    rng: &mut R,
) -> Result<Verdict, TesterError> {
    fresh(oracle)?;
    let (n, m) = (oracle.n(), oracle.m());
    let p = match plan(n, m, eps, constants)? {
        Plan::Fallback(_) => {
            return Ok(test_fallback(oracle, meta.rule(), eps, constants, rng)?.delegated(Variant::Grid));
        }
        Plan::Grid(p) => p,
    };
    let samples = (0..p.s)
        .map(|_| (rng.gen_range(p.t2 + 1..m), rng.gen_range(0..n)))
        .collect();
    let unit = Unit {
        topology: Topology::Ring,
        points: p.grid.clone(),
        samples,
    };
    let run = GridRun {
        t1: p.t1,
        t2: p.t2,
        delta: p.delta,
    };
    let reason = run_units(oracle, meta, &run, &[unit])?;
    let summary = PlanSummary {
        delta: Some(p.delta),
        t1: Some(p.t1),
        t2: Some(p.t2),
        grid_points: Some(p.grid.len()),
        samples: p.s,
        ..PlanSummary::default()
    };
    Ok(Verdict::new(reason, Variant::Grid, summary, oracle))
}

/// Reads row 0, evolves it, and compares uniformly sampled later cells.
pub fn test_fallback<R: Rng + ?Sized>(
    oracle: &mut QueryOracle,
    rule: Rule,
    eps: f64,
    constants: &Constants,
    rng: &mut R,
) -> Result<Verdict, TesterError> {
    fresh(oracle)?;
    let (n, m) = (oracle.n(), oracle.m());
    validate(n, m, eps)?;
    let s = sample_count(eps, constants);
    let mut samples: Vec<(usize, usize)> = (0..s).map(|_| (rng.gen_range(1..m), rng.gen_range(0..n))).collect();
    samples.sort_unstable();
    let bits = (0..n).map(|i| oracle.query(0, i)).collect::<Result<Vec<_>, _>>()?;
    let mut row = Configuration::from_bits(&bits).map_err(crate::OracleError::from)?;
    let mut row_t = 0;
    let mut reason = None;
    for (t, i) in samples {
        while row_t < t {
            row = row.evolve_step(rule);
            row_t += 1;
        }
        if oracle.query(t, i)? != row.get(i) && reason.is_none() {
            reason = Some(RejectReason::Mismatch { t, i });
        }
    }
    let summary = PlanSummary {
        samples: s,
        ..PlanSummary::default()
    };
    Ok(Verdict::new(reason, Variant::Fallback, summary, oracle))
}

/// Parameters of the interval variant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidePlan {
    pub interval_len: usize,
    pub intervals: usize,
    pub selected: usize,
    pub per_interval: usize,
    pub delta: usize,
    pub t1: usize,
    pub t2: usize,
}

/// `None` when the instance should go to the grid tester instead.
pub fn plan_wide(n: usize, m: usize, eps: f64, k: usize, c: &Constants) -> Result<Option<WidePlan>, TesterError> {
    validate(n, m, eps)?;
    if n as f64 <= c.b3 * m as f64 / (eps * eps) {
        return Ok(None);
    }
    let interval_len = ceil_tol(c.b3 * m as f64 / eps);
    let intervals = n / interval_len;
    let delta = floor_tol(eps * eps * m as f64 / c.b0).max(1);
    let t1 = ceil_tol(c.b1 * delta as f64 / eps);
    let t2 = t1 + delta;
    // Grid plus sample range must fit inside an interval.
    let inner = interval_len as i64 - 2 * (t1 + k + 1) as i64 - 2 * (m as i64 - 1 - t1 as i64) - delta as i64;
    if intervals == 0 || t2 + 1 >= m || inner < 0 {
        return Ok(None);
    }
    Ok(Some(WidePlan {
        interval_len,
        intervals,
        selected: intervals.min(ceil_tol(c.b5 / eps)),
        per_interval: ceil_tol(2.0 * c.b4 / eps).max(1),
        delta,
        t1,
        t2,
    }))
}

/// The interval variant for rings much longer than the horizon.
pub fn test_wide<R: Rng + ?Sized>(
    oracle: &mut QueryOracle,
    meta: &RuleMeta,
    eps: f64,
    constants: &Constants,
    rng: &mut R,
) -> Result<Verdict, TesterError> {
    fresh(oracle)?;
    let (n, m, k) = (oracle.n(), oracle.m(), meta.k());
    let Some(wp) = plan_wide(n, m, eps, k, constants)? else {
        return Ok(test(oracle, meta, eps, constants, rng)?.delegated(Variant::Wide));
    };
    let mut chosen = index::sample(rng, wp.intervals, wp.selected).into_vec();
    chosen.sort_unstable();
    let units: Vec<Unit> = chosen
        .iter()
        .map(|&j| {
            let i0 = j * wp.interval_len;
            let j0 = i0 + wp.interval_len - 1;
            let lo = i0 + wp.t1 + k + 1;
            let hi = j0 - wp.t1 - k - 1;
            let points: Vec<usize> = (lo..=hi).step_by(wp.delta).collect();
            let last = *points.last().expect("nonempty grid");
            let samples = (0..wp.per_interval)
                .map(|_| {
                    let t = rng.gen_range(wp.t2 + 1..m);
                    let reach = t - wp.t1;
                    (t, rng.gen_range(lo + reach..=last - reach))
                })
                .collect();
            Unit {
                topology: Topology::Segment,
                points,
                samples,
            }
        })
        .collect();
    let run = GridRun {
        t1: wp.t1,
        t2: wp.t2,
        delta: wp.delta,
    };
    let reason = run_units(oracle, meta, &run, &units)?;
    let summary = PlanSummary {
        delta: Some(wp.delta),
        t1: Some(wp.t1),
        t2: Some(wp.t2),
        grid_points: Some(units.iter().map(|u| u.points.len()).sum()),
        samples: wp.per_interval * units.len(),
        interval_len: Some(wp.interval_len),
        intervals: Some(units.len()),
    };
    Ok(Verdict::new(reason, Variant::Wide, summary, oracle))
}

/// Radius of the windows read by the NOR/NAND tester.
pub const TRIVIAL_RADIUS: usize = 3;

fn forbidden_blocks(rule: TrivialRule) -> &'static [&'static str] {
    match rule {
        TrivialRule::Nor => &["101", "1001"],
        TrivialRule::Nand => &["010", "0110"],
        _ => &[],
    }
}

fn contains_block(w: Pattern, block: &str) -> bool {
    let s = w.to_string();
    s.contains(block)
}

/// Testers for rules that settle after one step: constants, or a two-cycle
/// from time 1 on.
pub fn test_trivial<R: Rng + ?Sized>(
    oracle: &mut QueryOracle,
    rule: TrivialRule,
    eps: f64,
    constants: &Constants,
    rng: &mut R,
) -> Result<Verdict, TesterError> {
    fresh(oracle)?;
    let (n, m) = (oracle.n(), oracle.m());
    validate(n, m, eps)?;
    let s = sample_count(eps, constants);
    let summary = PlanSummary {
        samples: s,
        ..PlanSummary::default()
    };
    if let Some(value) = rule.constant() {
        let mut samples: Vec<(usize, usize)> = (0..s).map(|_| (rng.gen_range(1..m), rng.gen_range(0..n))).collect();
        samples.sort_unstable();
        let mut reason = None;
        for (t, i) in samples {
            if oracle.query(t, i)? != value && reason.is_none() {
                reason = Some(RejectReason::Mismatch { t, i });
            }
        }
        return Ok(Verdict::new(reason, Variant::Trivial, summary, oracle));
    }
    let r = TRIVIAL_RADIUS;
    if m < 3 || n < 2 * r + 1 {
        return Ok(test_fallback(oracle, rule.rule(), eps, constants, rng)?.delegated(Variant::Trivial));
    }
    let mut samples: Vec<(usize, usize)> = (0..s)
        .map(|_| {
            let t = if m > 3 { rng.gen_range(3..m) } else { 2 };
            (t, rng.gen_range(0..n))
        })
        .collect();
    samples.sort_by_key(|&(t, i)| (i, t));
    let first = samples
        .iter()
        .map(|&(_, i)| oracle.query_window(1, i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let second = samples
        .iter()
        .map(|&(_, i)| oracle.query_window(2, i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut by_time: Vec<usize> = (0..s).collect();
    by_time.sort_by_key(|&j| (samples[j].0, j));
    let mut later = vec![None; s];
    for &j in &by_time {
        let (t, i) = samples[j];
        if t >= 3 {
            later[j] = Some(oracle.query_window(t, i, r)?);
        }
    }
    let step = rule.rule();
    let mut reason = None;
    for &j in &by_time {
        let (t, i) = samples[j];
        let (w1, w2) = (first[j], second[j]);
        for (time, w) in [(1, w1), (2, w2)].into_iter().chain(later[j].map(|w| (t, w))) {
            if forbidden_blocks(rule).iter().any(|b| contains_block(w, b)) {
                reason = Some(RejectReason::Forbidden { t: time, i, window: w });
                break;
            }
        }
        if reason.is_some() {
            break;
        }
        // Cells i-2..=i+2 at time 2 follow from time 1.
        let stepped = (1..2 * r).all(|c| step.apply(w1.bit(c - 1), w1.bit(c), w1.bit(c + 1)) == w2.bit(c));
        if !stepped {
            reason = Some(RejectReason::Mismatch { t: 2, i });
            break;
        }
        if let Some(w) = later[j] {
            let base = if t % 2 == 1 { w1 } else { w2 };
            if w != base {
                reason = Some(RejectReason::Mismatch { t, i });
                break;
            }
        }
    }
    Ok(Verdict::new(reason, Variant::Trivial, summary, oracle))
}
