//! Generators and exhaustive checks shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use ecatest::brute;
use ecatest::rules::{structured_configuration, Pattern, RuleMeta};
use ecatest::tester::{
    check_feasible, grid_intervals, plan, violation_check, Classifier, Constants, Feasibility, GridView, PairClass,
    Plan, Topology,
};
use ecatest::{evolve, evolve_small, random_configuration, Configuration, Environment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random grid view: windows either read from a configuration reached after
/// `t1` steps, or from a perturbed one, or drawn at random.
pub fn random_view(meta: &RuleMeta, n: usize, t1: usize, rng: &mut ChaCha8Rng) -> GridView {
    let k = meta.k();
    let count = rng.gen_range(1..=n);
    let mut points: Vec<usize> = rand::seq::index::sample(rng, n, count).into_vec();
    points.sort_unstable();
    let mut x = rng.gen::<u64>() & ((1 << n) - 1);
    for _ in 0..t1 {
        x = evolve_small(x, n, meta.rule());
    }
    match rng.gen_range(0..3) {
        0 => {}
        1 => x ^= 1 << rng.gen_range(0..n),
        _ => x = rng.gen::<u64>() & ((1 << n) - 1),
    }
    let c = Configuration::from_u64(n, x).unwrap();
    let mut gv = GridView::from_configuration(&c, k, t1, Topology::Ring, points.clone()).unwrap();
    if rng.gen_bool(0.1) {
        let windows = points.iter().map(|_| Pattern::new(rng.gen(), 2 * k + 1)).collect();
        gv = GridView::new(n, k, t1, Topology::Ring, points, windows).unwrap();
    }
    gv
}

/// Random views on rings of 4 to `n_max` cells: (agreements, feasible, trials).
pub fn random_agreement(meta: &RuleMeta, trials: usize, n_max: usize, seed: u64) -> (usize, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut agree, mut feasible) = (0, 0);
    for _ in 0..trials {
        let n = rng.gen_range(4..=n_max);
        let t1 = rng.gen_range(1..=n / 2 + 1);
        let gv = random_view(meta, n, t1, &mut rng);
        let fast = check_feasible(meta, &gv).unwrap().is_feasible();
        let slow = brute::feasible(&gv, meta.rule()).unwrap();
        agree += (fast == slow) as usize;
        feasible += slow as usize;
    }
    (agree, feasible, trials)
}

/// Every assignment of the covered cells of an evenly spaced grid:
/// (agreements, views).
pub fn sweep(meta: &RuleMeta, n: usize, spacing: usize, t1: usize) -> (usize, usize) {
    let k = meta.k();
    let points: Vec<usize> = (0..n).step_by(spacing).collect();
    let image = brute::ImageSet::new(meta.rule(), n, t1).unwrap();
    let probe =
        GridView::from_configuration(&Configuration::zeros(n).unwrap(), k, t1, Topology::Ring, points.clone()).unwrap();
    let (mask, _) = brute::grid_mask(&probe).unwrap();
    let free: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
    let mut agree = 0;
    for bits in 0..1u64 << free.len() {
        let x = free.iter().enumerate().fold(0u64, |acc, (j, &i)| acc | (bits >> j & 1) << i);
        let c = Configuration::from_u64(n, x).unwrap();
        let gv = GridView::from_configuration(&c, k, t1, Topology::Ring, points.clone()).unwrap();
        agree += (check_feasible(meta, &gv).unwrap().is_feasible() == image.matches(mask, x)) as usize;
    }
    (agree, 1 << free.len())
}

/// Sweep over n 4..=12, spacing 1..=3, t1 1..=4.
pub fn full_sweep(meta: &RuleMeta) -> (usize, usize) {
    let mut out = (0, 0);
    for n in 4..=12 {
        for spacing in 1..=3 {
            for t1 in 1..=4 {
                let (a, v) = sweep(meta, n, spacing, t1);
                out = (out.0 + a, out.1 + v);
            }
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct Census {
    /// Pairs in A, B, C and U.
    pub counts: [u64; 4],
    /// Pairs meeting more than one of the A, B and C predicates.
    pub overlaps: u64,
    /// Classified pairs failing their requirement.
    pub violations: u64,
    /// `5 eps m n / b1`.
    pub u_bound: f64,
}

/// Classifies every pair `(t, i)` with `t > t2` against the grid read from
/// `env` at `t1`. `None` when the plan falls back or the view is infeasible.
pub fn census(meta: &RuleMeta, env: &Environment, eps: f64, c: &Constants) -> Option<Census> {
    let Plan::Grid(p) = plan(env.n(), env.m(), eps, c).unwrap() else {
        return None;
    };
    let gv = GridView::from_configuration(env.row(p.t1), meta.k(), p.t1, Topology::Ring, p.grid.clone()).unwrap();
    if check_feasible(meta, &gv).unwrap() != Feasibility::Feasible {
        return None;
    }
    let gi = grid_intervals(meta, &gv);
    let classifier = Classifier::new(&gv, &gi, p.t2, p.flank_margin(gv.max_spacing()));
    let mut out = Census {
        u_bound: 5.0 * eps * (env.m() * env.n()) as f64 / c.b1,
        ..Census::default()
    };
    for t in p.t2 + 1..env.m() {
        for i in 0..env.n() {
            let hits = classifier.predicates(t, i).unwrap();
            if hits.iter().filter(|&&h| h).count() > 1 {
                out.overlaps += 1;
            }
            let class = classifier.classify(t, i).unwrap();
            out.counts["ABCU".find(class.letter()).unwrap()] += 1;
            if class != PairClass::U {
                let (w, w2) = (env.row(t).window(i, meta.k()), env.row(p.t2).window(i, meta.k()));
                out.violations += violation_check(meta, &class, t, i, p.t2, w, w2, &gv).unwrap().is_some() as u64;
            }
        }
    }
    Some(out)
}

/// Random initial configuration when `block` is 0, else a structured one.
pub fn initial(meta: &RuleMeta, n: usize, block: usize, rng: &mut ChaCha8Rng) -> Configuration {
    if block == 0 {
        random_configuration(n, rng).unwrap()
    } else {
        structured_configuration(meta, n, block, rng).unwrap()
    }
}

pub fn evolving(meta: &RuleMeta, n: usize, m: usize, block: usize, rng: &mut ChaCha8Rng) -> Environment {
    evolve(&initial(meta, n, block, rng), meta.rule(), m).unwrap()
}
