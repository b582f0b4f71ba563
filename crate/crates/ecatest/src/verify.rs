//! Machine checks of the six structural conditions a rule's metadata must
//! satisfy for the meta-tester to be complete and sound.
//!
//! Conditions 1 and 2 are window-local and checked over every window.
//! Conditions 3 to 6 are checked by exhaustive enumeration at small sizes.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::rules::{Parity, Pattern, PlantRequest, RuleMeta, Side};
use crate::{evolve_small, Configuration, Ring, TimeLocation};

/// Smallest ring on which the constructors of conditions 5 and 6 are checked.
///
/// On the 3-ring a homogeneous window covers the whole ring, leaving no room
/// for a non-final cell between `z` and the planted location.
pub const CONSTRUCTOR_MIN_N: usize = 4;

/// Largest ring the evolution checks enumerate.
pub const MAX_ENUM_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Counterexample {
    /// A `(2k+3)`-window whose one-step image breaks the condition.
    Window { window: String, next: String },
    /// Two pairs of one enumerated evolution meeting the premise but not the
    /// conclusion.
    Pairs {
        n: usize,
        initial: String,
        later: TimeLocation,
        earlier: TimeLocation,
        expected: String,
        found: String,
    },
    /// A constructor output that breaks a clause.
    Construction { sigma: String, args: String, output: String, clause: String },
    /// An enumerated evolution breaking a structural observation.
    Evolution { n: usize, initial: String, at: TimeLocation, detail: String },
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counterexample::Window { window, next } => write!(f, "window {window} -> {next}"),
            Counterexample::Pairs {
                n,
                initial,
                later,
                earlier,
                expected,
                found,
            } => write!(
                f,
                "n={n} init={initial}: ({}, {}) from ({}, {}) expected {expected}, found {found}",
                later.t, later.i, earlier.t, earlier.i
            ),
            Counterexample::Construction {
                sigma,
                args,
                output,
                clause,
            } => write!(f, "sigma={sigma} {args} -> {output}: {clause}"),
            Counterexample::Evolution { n, initial, at, detail } => {
                write!(f, "n={n} init={initial} at ({}, {}): {detail}", at.t, at.i)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CondOutcome {
    Pass,
    Fail(Counterexample),
}

impl CondOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CondOutcome::Pass)
    }

    fn from_option(c: Option<Counterexample>) -> CondOutcome {
        c.map_or(CondOutcome::Pass, CondOutcome::Fail)
    }
}

/// Enumeration sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub n_max: usize,
    pub m_max: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { n_max: 12, m_max: 12 }
    }
}

/// Applies the rule to every interior triple of `w`, shrinking it by two.
fn step_window(meta: &RuleMeta, w: Pattern) -> Pattern {
    let out_len = w.len() - 2;
    let mut bits = 0u32;
    for j in 0..out_len {
        bits = bits << 1 | meta.rule().apply_bits(w.sub(j, 3).bits()) as u32;
    }
    Pattern::new(bits, out_len)
}

/// Every window breaking condition 1: a final center whose successor is not
/// final.
pub fn cond1_failures(meta: &RuleMeta) -> Vec<Counterexample> {
    let width = meta.width();
    Pattern::all(width + 2)
        .filter(|w| meta.is_final(w.sub(1, width)))
        .filter_map(|w| {
            let next = step_window(meta, w);
            (!meta.is_final(next)).then(|| Counterexample::Window {
                window: w.to_string(),
                next: next.to_string(),
            })
        })
        .collect()
}

pub fn verify_cond1(meta: &RuleMeta) -> CondOutcome {
    CondOutcome::from_option(cond1_failures(meta).into_iter().next())
}

/// Every window breaking condition 2: a non-final center that becomes final
/// without a final neighbor, or stays non-final despite one.
pub fn cond2_failures(meta: &RuleMeta) -> Vec<Counterexample> {
    let width = meta.width();
    Pattern::all(width + 2)
        .filter(|w| !meta.is_final(w.sub(1, width)))
        .filter_map(|w| {
            let next = step_window(meta, w);
            let has_final_neighbor = meta.is_final(w.sub(0, width)) || meta.is_final(w.sub(2, width));
            (meta.is_final(next) != has_final_neighbor).then(|| Counterexample::Window {
                window: w.to_string(),
                next: next.to_string(),
            })
        })
        .collect()
}

pub fn verify_cond2(meta: &RuleMeta) -> CondOutcome {
    CondOutcome::from_option(cond2_failures(meta).into_iter().next())
}

/// One enumerated evolution on a ring of at most 64 cells.
struct SmallEvolution {
    n: usize,
    rows: Vec<u64>,
    finals: Vec<u64>,
}

impl SmallEvolution {
    fn new(meta: &RuleMeta, n: usize, x: u64, m: usize) -> SmallEvolution {
        let mut rows = Vec::with_capacity(m);
        let mut cur = x;
        for _ in 0..m {
            rows.push(cur);
            cur = evolve_small(cur, n, meta.rule());
        }
        let finals = rows
            .iter()
            .map(|&r| (0..n).fold(0u64, |acc, i| acc | (meta.is_final(window_of(r, n, i, meta.k())) as u64) << i))
            .collect();
        SmallEvolution { n, rows, finals }
    }

    fn bit(&self, t: usize, i: usize) -> bool {
        self.rows[t] >> i & 1 == 1
    }

    fn is_final(&self, t: usize, i: usize) -> bool {
        self.finals[t] >> i & 1 == 1
    }

    fn window(&self, t: usize, i: usize, k: usize) -> Pattern {
        window_of(self.rows[t], self.n, i, k)
    }

    fn initial(&self) -> String {
        (0..self.n).map(|i| if self.bit(0, i) { '1' } else { '0' }).collect()
    }
}

fn window_of(row: u64, n: usize, i: usize, k: usize) -> Pattern {
    let mut bits = 0u32;
    for d in 0..=2 * k {
        let j = (i as i64 + d as i64 - k as i64).rem_euclid(n as i64) as u64;
        bits = bits << 1 | (row >> j & 1) as u32;
    }
    Pattern::new(bits, 2 * k + 1)
}

/// Mask of locations within ring distance `r` of `i`.
fn cone_mask(n: usize, i: usize, r: usize) -> u64 {
    if 2 * r + 1 >= n {
        return if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    }
    let mut m = 0u64;
    for d in -(r as i64)..=r as i64 {
        m |= 1 << (i as i64 + d).rem_euclid(n as i64);
    }
    m
}

fn enumerate<F>(meta: &RuleMeta, n_min: usize, n_max: usize, m_max: usize, check: F) -> Option<Counterexample>
where
    F: Fn(&SmallEvolution) -> Option<Counterexample> + Sync,
{
    let n_max = n_max.min(MAX_ENUM_N);
    let jobs: Vec<(usize, u64)> = (n_min.max(3)..=n_max)
        .flat_map(|n| (0..1u64 << n).map(move |x| (n, x)))
        .collect();
    jobs.par_iter()
        .find_map_first(|&(n, x)| check(&SmallEvolution::new(meta, n, x, m_max)))
}

fn cond3_in(meta: &RuleMeta, ev: &SmallEvolution) -> Option<Counterexample> {
    let n = ev.n;
    let ring = Ring::new(n).expect("n >= 3");
    let m = ev.rows.len();
    for t in 1..m {
        for i in 0..n {
            if !ev.is_final(t, i) {
                continue;
            }
            for tp in 0..t {
                // The unique nearest final location at time tp, if any.
                let mut source = None;
                for d in 0..=n / 2 {
                    let a = ring.offset(i, -(d as i64));
                    let b = ring.offset(i, d as i64);
                    let fa = ev.is_final(tp, a);
                    let fb = ev.is_final(tp, b);
                    if fa || fb {
                        if a == b || fa != fb {
                            source = Some((if fa { a } else { b }, d));
                        }
                        break;
                    }
                }
                let Some((ip, d)) = source else { continue };
                if d > t - tp {
                    continue;
                }
                let expected = meta.f_fwd(ev.bit(tp, ip), Parity::of(t - tp), Parity::of(d));
                if ev.bit(t, i) != expected {
                    return Some(Counterexample::Pairs {
                        n,
                        initial: ev.initial(),
                        later: TimeLocation::new(t, i),
                        earlier: TimeLocation::new(tp, ip),
                        expected: (expected as u8).to_string(),
                        found: (ev.bit(t, i) as u8).to_string(),
                    });
                }
            }
        }
    }
    None
}

fn cond4_in(meta: &RuleMeta, ev: &SmallEvolution) -> Option<Counterexample> {
    let n = ev.n;
    let ring = Ring::new(n).expect("n >= 3");
    let k = meta.k();
    let m = ev.rows.len();
    for t in 1..m {
        for i in 0..n {
            if ev.is_final(t, i) {
                continue;
            }
            let found = ev.window(t, i, k);
            for tp in 0..t {
                let r = t - tp;
                let cone = cone_mask(n, i, r);
                if ev.finals[tp] & cone != 0 {
                    continue;
                }
                for ip in (0..n).filter(|&j| cone >> j & 1 == 1) {
                    let source = ev.window(tp, ip, k);
                    let expected = meta
                        .h_fwd(source, Parity::of(r), ring.signed_offset(ip, i))
                        .expect("source window is non-final");
                    if expected != found {
                        return Some(Counterexample::Pairs {
                            n,
                            initial: ev.initial(),
                            later: TimeLocation::new(t, i),
                            earlier: TimeLocation::new(tp, ip),
                            expected: expected.to_string(),
                            found: found.to_string(),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Final-value prediction from the nearest final ancestor, over every
/// evolution with `3 <= n <= n_max` and `m_max` rows.
pub fn verify_cond3(meta: &RuleMeta, n_max: usize, m_max: usize) -> CondOutcome {
    CondOutcome::from_option(enumerate(meta, 3, n_max, m_max, |ev| cond3_in(meta, ev)))
}

/// Non-final window transport from any ancestor whose whole light cone is
/// non-final.
pub fn verify_cond4(meta: &RuleMeta, n_max: usize, m_max: usize) -> CondOutcome {
    CondOutcome::from_option(enumerate(meta, 3, n_max, m_max, |ev| cond4_in(meta, ev)))
}

fn all_configurations(n_min: usize, n_max: usize) -> Vec<Configuration> {
    (n_min..=n_max.min(MAX_ENUM_N))
        .flat_map(|n| (0..1u64 << n).map(move |x| Configuration::from_u64(n, x).expect("n >= 3")))
        .collect()
}

fn cond5_in(meta: &RuleMeta, sigma: &Configuration) -> Option<Counterexample> {
    let n = sigma.len();
    let ring = sigma.ring();
    let finals: Vec<bool> = (0..n).map(|i| meta.window_final(sigma, i)).collect();
    for x in (0..n).filter(|&x| finals[x]) {
        for y in (0..n).filter(|&y| finals[y]) {
            let out = match meta.finalize_interval(sigma, x, y) {
                Ok(out) => out,
                Err(e) => return Some(construction(sigma, format!("x={x} y={y}"), sigma, &e.to_string())),
            };
            let inside = |i: usize| x == y || ring.in_interval(i, x, y);
            let fail = |clause: &str| Some(construction(sigma, format!("x={x} y={y}"), &out, clause));
            for i in 0..n {
                if !inside(i) {
                    if out.get(i) != sigma.get(i) {
                        return fail(&format!("location {i} outside the interval changed"));
                    }
                    continue;
                }
                if !meta.window_final(&out, i) {
                    return fail(&format!("window at {i} is not final"));
                }
                if finals[i] && out.get(i) != sigma.get(i) {
                    return fail(&format!("final location {i} changed"));
                }
            }
        }
    }
    None
}

fn construction(sigma: &Configuration, args: String, out: &Configuration, clause: &str) -> Counterexample {
    Counterexample::Construction {
        sigma: sigma.to_string(),
        args,
        output: out.to_string(),
        clause: clause.to_string(),
    }
}

fn cond6_in(meta: &RuleMeta, sigma: &Configuration) -> Option<Counterexample> {
    let n = sigma.len();
    let ring = sigma.ring();
    let k = meta.k();
    for z in (0..n).filter(|&z| !meta.window_final(sigma, z)) {
        for nu in meta.legal_centers() {
            for gamma in [Parity::EVEN, Parity::ODD] {
                for gamma_prime in [Parity::EVEN, Parity::ODD] {
                    for side in [Side::Right, Side::Left] {
                        let req = PlantRequest {
                            z,
                            nu,
                            gamma,
                            gamma_prime,
                            side,
                        };
                        let args = format!(
                            "z={z} nu={} gamma={} gamma'={} side={side:?}",
                            nu as u8, gamma.bit() as u8, gamma_prime.bit() as u8
                        );
                        let (out, zp) = match meta.plant_final(sigma, &req) {
                            Ok(r) => r,
                            Err(e) => return Some(construction(sigma, args, sigma, &e.to_string())),
                        };
                        let fail = |clause: String| Some(construction(sigma, args.clone(), &out, &clause));
                        let d = match side {
                            Side::Right => ring.ddist(z, zp),
                            Side::Left => ring.ddist(zp, z),
                        };
                        if d == 0 || d > 2 * k + 1 {
                            return fail(format!("z' = {zp} out of range"));
                        }
                        if !meta.window_final(&out, zp) {
                            return fail(format!("window at z' = {zp} is not final"));
                        }
                        if meta.f_fwd(out.get(zp), gamma, Parity::of(d) ^ gamma_prime) != nu {
                            return fail("prediction from z' misses nu".into());
                        }
                        let dir = if side == Side::Right { 1 } else { -1 };
                        for s in 1..d {
                            let i = ring.offset(z, dir * s as i64);
                            if meta.window_final(&out, i) {
                                return fail(format!("window at {i} between z and z' is final"));
                            }
                        }
                        // Locations allowed to change: [z+k, z'+k] or [z'-k, z-k].
                        let (lo, hi) = match side {
                            Side::Right => (ring.offset(z, k as i64), ring.offset(zp, k as i64)),
                            Side::Left => (ring.offset(zp, -(k as i64)), ring.offset(z, -(k as i64))),
                        };
                        for i in 0..n {
                            if !ring.in_interval(i, lo, hi) && out.get(i) != sigma.get(i) {
                                return fail(format!("location {i} outside the footprint changed"));
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Interval finalization over every configuration with
/// `CONSTRUCTOR_MIN_N <= n <= n_max` and every pair of final endpoints.
pub fn verify_cond5(meta: &RuleMeta, n_max: usize) -> CondOutcome {
    verify_cond5_from(meta, CONSTRUCTOR_MIN_N, n_max)
}

pub fn verify_cond5_from(meta: &RuleMeta, n_min: usize, n_max: usize) -> CondOutcome {
    let configs = all_configurations(n_min, n_max);
    CondOutcome::from_option(configs.par_iter().find_map_first(|s| cond5_in(meta, s)))
}

/// Planting over every configuration with `CONSTRUCTOR_MIN_N <= n <= n_max`
/// and every valid argument tuple.
pub fn verify_cond6(meta: &RuleMeta, n_max: usize) -> CondOutcome {
    verify_cond6_from(meta, CONSTRUCTOR_MIN_N, n_max)
}

pub fn verify_cond6_from(meta: &RuleMeta, n_min: usize, n_max: usize) -> CondOutcome {
    let configs = all_configurations(n_min, n_max);
    CondOutcome::from_option(configs.par_iter().find_map_first(|s| cond6_in(meta, s)))
}

/// Deliberately broken metadata, for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mutation {
    /// Final and non-final windows swapped, transport the identity.
    SwapPartition,
    /// Final prediction ignoring both parities.
    IdentityPrediction,
}

impl std::str::FromStr for Mutation {
    type Err = crate::RuleError;

    fn from_str(s: &str) -> Result<Mutation, crate::RuleError> {
        match s {
            "swap-partition" => Ok(Mutation::SwapPartition),
            "identity-prediction" => Ok(Mutation::IdentityPrediction),
            other => Err(crate::RuleError::UnknownRule(format!("unknown mutation {other:?}"))),
        }
    }
}

pub fn mutate(meta: &RuleMeta, mutation: Mutation) -> RuleMeta {
    let builder = meta.to_builder();
    match mutation {
        Mutation::SwapPartition => builder
            .final_patterns(meta.non_final_patterns())
            .transport(|tau, _, _| tau)
            .build_unchecked(),
        Mutation::IdentityPrediction => builder.prediction(false, false).build_unchecked(),
    }
}

/// Outcome of each of the six conditions, in order.
pub fn verify_all(meta: &RuleMeta, bounds: Bounds) -> Vec<(u8, CondOutcome)> {
    vec![
        (1, verify_cond1(meta)),
        (2, verify_cond2(meta)),
        (3, verify_cond3(meta, bounds.n_max, bounds.m_max)),
        (4, verify_cond4(meta, bounds.n_max, bounds.m_max)),
        (5, verify_cond5(meta, bounds.n_max)),
        (6, verify_cond6(meta, bounds.n_max)),
    ]
}

/// Every descendant of a final pair is final, on every enumerated evolution.
pub fn check_final_persistence(meta: &RuleMeta, n_max: usize, m_max: usize) -> CondOutcome {
    CondOutcome::from_option(enumerate(meta, 3, n_max, m_max, |ev| {
        let n = ev.n;
        for t in 1..ev.rows.len() {
            for tp in 0..t {
                for ip in (0..n).filter(|&j| ev.is_final(tp, j)) {
                    let cone = cone_mask(n, ip, t - tp);
                    if ev.finals[t] & cone != cone {
                        let i = (0..n).find(|&j| cone >> j & 1 == 1 && !ev.is_final(t, j)).expect("nonempty");
                        return Some(Counterexample::Evolution {
                            n,
                            initial: ev.initial(),
                            at: TimeLocation::new(t, i),
                            detail: format!("descends from final ({tp}, {ip}) but is not final"),
                        });
                    }
                }
            }
        }
        None
    }))
}

/// At time `t`, every final location lies in a run of at least `2t`
/// consecutive final locations, for `t <= n/2`.
pub fn check_final_run_length(meta: &RuleMeta, n_max: usize) -> CondOutcome {
    CondOutcome::from_option(enumerate(meta, 3, n_max, n_max / 2 + 1, |ev| {
        let n = ev.n;
        for t in 1..=n / 2 {
            let f = ev.finals[t];
            let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            if f == full || f == 0 {
                continue;
            }
            let start = (0..n).find(|&i| f >> i & 1 == 0).expect("some non-final");
            let mut run = 0;
            for s in 1..=n {
                let i = (start + s) % n;
                if f >> i & 1 == 1 {
                    run += 1;
                } else {
                    if run > 0 && run < 2 * t {
                        return Some(Counterexample::Evolution {
                            n,
                            initial: ev.initial(),
                            at: TimeLocation::new(t, (i + n - 1) % n),
                            detail: format!("final run of length {run} < {}", 2 * t),
                        });
                    }
                    run = 0;
                }
            }
        }
        None
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{builtin_meta, MetaBuilder};
    use crate::{Rule, RuleName};

    #[test]
    fn local_conditions_pass_for_builtins() {
        for name in crate::rules::META_RULES {
            let meta = builtin_meta(name).unwrap();
            assert!(verify_cond1(&meta).passed(), "{name}");
            assert!(verify_cond2(&meta).passed(), "{name}");
        }
    }

    #[test]
    fn swapped_partition_fails_cond1_at_11011() {
        let swapped = MetaBuilder::new("maj-swapped", Rule::MAJ, 1)
            .final_strs(&["101", "010"])
            .transport(|tau, _, _| tau)
            .build_unchecked();
        let failures = cond1_failures(&swapped);
        assert!(failures.contains(&Counterexample::Window {
            window: "11011".into(),
            next: "111".into()
        }));
    }

    #[test]
    fn xor_fails_cond2() {
        let xor = MetaBuilder::new("xor", Rule::XOR, 0)
            .final_strs(&["1"])
            .transport(|tau, _, _| tau)
            .build_unchecked();
        assert!(!verify_cond2(&xor).passed());
    }

    #[test]
    fn small_enumerations() {
        let maj = builtin_meta(RuleName::Maj).unwrap();
        assert!(verify_cond3(&maj, 8, 8).passed());
        assert!(verify_cond4(&maj, 8, 8).passed());
        assert!(verify_cond5(&maj, 8).passed());
        assert!(verify_cond6(&maj, 8).passed());
    }

    #[test]
    fn identity_prediction_fails_for_min() {
        let min = builtin_meta(RuleName::Min).unwrap();
        let broken = min.to_builder().prediction(false, false).build_unchecked();
        match verify_cond3(&broken, 6, 6) {
            CondOutcome::Fail(Counterexample::Pairs { later, earlier, .. }) => {
                assert_eq!((later.t - earlier.t) % 2, 1)
            }
            other => panic!("expected a pair counterexample, got {other:?}"),
        }
    }

    #[test]
    fn flip_on_even_transport_fails_for_min() {
        // Complementing when `dt xor parity(dd)` is even breaks even at zero gap.
        let min = builtin_meta(RuleName::Min).unwrap();
        let broken = min
            .to_builder()
            .transport(|tau, dt, dd| {
                if dt.bit() ^ Parity::of_signed(dd).bit() {
                    tau
                } else {
                    tau.complement()
                }
            })
            .build()
            .unwrap();
        assert!(!verify_cond4(&broken, 8, 8).passed());
    }

    #[test]
    fn run_value_blind_planting_fails_for_fih() {
        // Plant at z+1 iff nu xor gamma' is even, ignoring the run value.
        let fih = builtin_meta(RuleName::Fih).unwrap();
        let blind = fih
            .to_builder()
            .plant(std::sync::Arc::new(|_, sigma: &Configuration, req: &PlantRequest| {
                let n = sigma.len() as i64;
                let dir = if req.side == Side::Right { 1 } else { -1 };
                let at = |d: i64| (req.z as i64 + dir * d).rem_euclid(n) as usize;
                let c = sigma.get(req.z);
                let mut out = sigma.clone();
                if !(req.nu ^ req.gamma_prime.bit()) {
                    out.set(at(2), !c);
                    (out, at(1))
                } else {
                    out.set(at(2), !c);
                    out.set(at(3), !c);
                    (out, at(2))
                }
            }))
            .build()
            .unwrap();
        assert!(!verify_cond6(&blind, 6).passed());
    }
}
