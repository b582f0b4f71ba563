//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{census, evolving, full_sweep, initial, random_agreement};
use ecatest::brute::{exact_distance, period};
use ecatest::lab::{run_experiment, ExperimentSpec};
use ecatest::rules::{builtin_meta, trivial_rule, TrivialRule, META_RULES};
use ecatest::tester::{
    plan, plan_wide, test, test_fallback, test_trivial, test_wide, Constants, Plan, Variant, Verdict,
};
use ecatest::verify::{check_final_run_length, mutate, verify_all, Bounds, CondOutcome, Mutation};
use ecatest::{
    evolve, evolve_small, random_configuration, Configuration, Environment, LazyEvolution, OracleError,
    QueryOracle, RuleName, TesterError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: [f64; 6] = [0.1, 0.2, 0.3, 0.5, 0.7, 0.9];
const TRIVIAL: [RuleName; 4] = [RuleName::All1, RuleName::All0, RuleName::Nor, RuleName::Nand];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Time-conformity violations seen anywhere in the run.
#[derive(Default)]
struct Conformity {
    runs: u64,
    violations: u64,
}

impl Conformity {
    /// Records a tester run; the query log must be sorted by time.
    fn record(&mut self, result: Result<Verdict, TesterError>, oracle: &QueryOracle) -> Option<Verdict> {
        self.runs += 1;
        match result {
            Ok(v) => {
                let log = oracle.log().unwrap_or(&[]);
                if log.windows(2).any(|w| w[0].t > w[1].t) {
                    self.violations += 1;
                }
                Some(v)
            }
            Err(TesterError::Oracle(OracleError::TimeConformityViolation { .. })) => {
                self.violations += 1;
                None
            }
            Err(_) => None,
        }
    }
}

fn floor_tol(x: f64) -> usize {
    (x + 1e-9).floor() as usize
}

fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil() as usize
}

fn conditions() -> Outcome {
    let start = Instant::now();
    let bounds = Bounds { n_max: 12, m_max: 12 };
    let mut failures = Vec::new();
    for name in META_RULES {
        let meta = builtin_meta(name).unwrap();
        for (c, o) in verify_all(&meta, bounds) {
            if !o.passed() {
                failures.push(format!("{name} condition {c}"));
            }
        }
    }
    let controls = [(RuleName::Maj, Mutation::SwapPartition), (RuleName::Min, Mutation::IdentityPrediction)];
    let mut caught = Vec::new();
    for (name, mutation) in controls {
        let broken = mutate(&builtin_meta(name).unwrap(), mutation);
        match verify_all(&broken, bounds).into_iter().find(|(_, o)| !o.passed()) {
            Some((c, CondOutcome::Fail(x))) => caught.push(format!("{name}/{mutation:?} fails condition {c} ({x})")),
            _ => failures.push(format!("{name}/{mutation:?} mutation passed")),
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    let detail = format!("6 rules x 6 conditions in {elapsed:.1?}; {}; failures {failures:?}", caught.join("; "));
    Outcome::new(pass, detail)
}

fn completeness(conf: &mut Conformity) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    let (mut trials, mut rejects, mut errors) = (0u64, Vec::new(), 0u64);
    let mut by_variant = [0u64; 4];
    let mut tally = |v: Option<Verdict>, what: String, rejects: &mut Vec<String>| {
        trials += 1;
        match v {
            Some(v) => {
                by_variant[match v.variant {
                    Variant::Grid => 0,
                    Variant::Wide => 1,
                    Variant::Fallback => 2,
                    Variant::Trivial => 3,
                }] += 1;
                if !v.accepted() && rejects.len() < 5 {
                    rejects.push(format!("{what} {:?}", v.reason));
                } else if !v.accepted() {
                    rejects.push(String::new());
                }
            }
            None => errors += 1,
        }
    };
    for trial in 0..4000 {
        let meta = builtin_meta(META_RULES[trial % 6]).unwrap();
        let (n, m, eps) = (rng.gen_range(8..400), rng.gen_range(4..200), EPS[rng.gen_range(0..6)]);
        let c = if trial % 2 == 0 { Constants::PAPER } else { Constants::LAB };
        let block = if trial % 4 < 2 { 0 } else { rng.gen_range(1..=m) };
        let env = evolving(&meta, n, m, block, &mut rng);
        let mut oracle = QueryOracle::new(&env).with_log();
        let r = test(&mut oracle, &meta, eps, &c, &mut rng);
        tally(conf.record(r, &oracle), format!("grid {} n={n} m={m} eps={eps}", meta.name()), &mut rejects);
    }
    for trial in 0..2000 {
        let meta = builtin_meta(META_RULES[trial % 6]).unwrap();
        let (n, m, eps, c) = if trial % 2 == 0 {
            (rng.gen_range(2000..20000), rng.gen_range(10..60), EPS[rng.gen_range(0..6)], Constants::LAB_WIDE)
        } else {
            (rng.gen_range(5000..30000), rng.gen_range(35..60), [0.7, 0.9][trial % 4 / 2], Constants::PAPER_WIDE)
        };
        let block = if trial % 3 == 0 { rng.gen_range(1..=m) } else { 0 };
        let init = initial(&meta, n, block, &mut rng);
        let mut oracle = QueryOracle::new(LazyEvolution::new(init, meta.rule(), m).unwrap()).with_log();
        let r = test_wide(&mut oracle, &meta, eps, &c, &mut rng);
        tally(conf.record(r, &oracle), format!("wide {} n={n} m={m} eps={eps}", meta.name()), &mut rejects);
    }
    for trial in 0..3000 {
        let name = RuleName::ALL[trial % RuleName::ALL.len()];
        let (n, m, eps) = (rng.gen_range(4..200), rng.gen_range(2..100), EPS[rng.gen_range(0..6)]);
        let c = if trial % 2 == 0 { Constants::PAPER } else { Constants::LAB };
        let rule = name.rule();
        let env = evolve(&random_configuration(n, &mut rng).unwrap(), rule, m).unwrap();
        let mut oracle = QueryOracle::new(&env).with_log();
        let r = test_fallback(&mut oracle, rule, eps, &c, &mut rng);
        tally(conf.record(r, &oracle), format!("fallback {name} n={n} m={m}"), &mut rejects);
    }
    for trial in 0..3000 {
        let rule: TrivialRule = trivial_rule(TRIVIAL[trial % 4]).unwrap();
        let (n, m, eps) = (rng.gen_range(4..300), rng.gen_range(2..150), EPS[rng.gen_range(0..6)]);
        let c = if trial % 2 == 0 { Constants::PAPER } else { Constants::LAB };
        let env = evolve(&random_configuration(n, &mut rng).unwrap(), rule.rule(), m).unwrap();
        let mut oracle = QueryOracle::new(&env).with_log();
        let r = test_trivial(&mut oracle, rule, eps, &c, &mut rng);
        tally(conf.record(r, &oracle), format!("trivial {} n={n} m={m}", rule.name()), &mut rejects);
    }
    let shown: Vec<&String> = rejects.iter().filter(|s| !s.is_empty()).collect();
    let pass = rejects.is_empty() && errors == 0 && trials >= 10_000 && by_variant.iter().all(|&c| c > 0);
    Outcome::new(
        pass,
        format!(
            "{trials} trials, {} rejections, {errors} errors; grid/wide/fallback/trivial runs {by_variant:?} {shown:?}",
            rejects.len()
        ),
    )
}

fn cell_spec(rule: &str, strategies: &[&str], sizes: &str, eps: &str, profile: &str, instances: usize) -> ExperimentSpec {
    let strategies: Vec<String> = strategies.iter().map(|s| format!("{s:?}")).collect();
    let text = format!(
        "rule = {rule:?}\neps = {eps}\nsizes = {sizes}\ntrials = 200\nstrategy = [{}]\nprofile = {profile:?}\n\
         seed = 2024\ntiming = false\ninstances = {instances}\n",
        strategies.join(", ")
    );
    ExperimentSpec::from_toml(&text).unwrap()
}

fn soundness() -> Outcome {
    // Exact certification costs a few hundred milliseconds per n=16 instance,
    // so each lab cell reuses a pool of certified instances.
    let specs = [
        cell_spec("maj", &["splice", "noise:0.3"], "[[16, 200]]", "[0.1, 0.2]", "lab", 25),
        cell_spec("min", &["complement-suffix", "wrong-rule:maj"], "[[16, 200]]", "[0.1, 0.2]", "lab", 25),
        cell_spec("or", &["noise:0.3", "wrong-rule:min"], "[[16, 200]]", "[0.1, 0.2]", "lab", 25),
        cell_spec("maj", &["wrong-rule:min"], "[[9600, 9600]]", "[0.1]", "paper", 8),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for spec in &specs {
        match run_experiment(spec) {
            Ok(table) => {
                for cell in &table.cells {
                    let ok = cell.trials >= 200 && cell.reject_rate() >= 2.0 / 3.0;
                    pass &= ok;
                    lines.push(format!(
                        "{} {} n={} m={} eps={} {}: {}/{}",
                        cell.profile, cell.rule, cell.n, cell.m, cell.eps, cell.strategy, cell.rejects, cell.trials
                    ));
                }
            }
            Err(e) => {
                pass = false;
                lines.push(format!("error: {e}"));
            }
        }
    }
    Outcome::new(pass, format!("{} cells, reject counts [{}]", lines.len(), lines.join("; ")))
}

fn oracle_equivalence() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (seed, name) in [(41, RuleName::Maj), (42, RuleName::Or)] {
        let meta = builtin_meta(name).unwrap();
        let (agree, feasible, trials) = random_agreement(&meta, 10_000, 16, seed);
        let (swept, views) = full_sweep(&meta);
        pass &= agree == trials && swept == views;
        parts.push(format!("{name}: random {agree}/{trials} ({feasible} feasible), sweep {swept}/{views}"));
    }
    Outcome::new(pass, parts.join("; "))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

fn query_accounting(conf: &mut Conformity) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5);
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let mut paper_total = 0;
    let mut cases: Vec<(RuleName, usize, usize, f64, Constants)> =
        vec![(RuleName::Maj, 9600, 9600, 0.1, Constants::PAPER)];
    for trial in 0..600 {
        let c = if trial % 2 == 0 { Constants::LAB } else { Constants::PAPER };
        let (n, m) = if trial % 2 == 0 {
            (rng.gen_range(50..800), rng.gen_range(20..400))
        } else {
            (rng.gen_range(2000..6000), rng.gen_range(2000..6000))
        };
        cases.push((META_RULES[trial % 6], n, m, EPS[rng.gen_range(0..6)], c));
    }
    for (name, n, m, eps, c) in cases {
        let meta = builtin_meta(name).unwrap();
        let Plan::Grid(p) = plan(n, m, eps, &c).unwrap() else { continue };
        let k = meta.k();
        let delta = floor_tol(eps * eps * n.min(m) as f64 / c.b0).max(1);
        let s = ceil_tol(2.0 * c.b2 / eps);
        let expected = ((2 * k + 1) * (n / delta) + 2 * (2 * k + 1) * s) as u64;
        let env = evolving(&meta, n, m, 0, &mut rng);
        let mut oracle = QueryOracle::new(&env).with_log();
        let r = test(&mut oracle, &meta, eps, &c, &mut rng);
        let Some(v) = conf.record(r, &oracle) else {
            mismatches.push(format!("{name} n={n} m={m} eps={eps}: error"));
            continue;
        };
        checked += 1;
        if n == 9600 && m == 9600 {
            paper_total = v.stats.total;
        }
        if v.stats.total != expected || p.grid.len() != n / delta {
            mismatches.push(format!("{name} n={n} m={m} eps={eps}: {} vs {expected}", v.stats.total));
        }
    }

    let meta = builtin_meta(RuleName::Maj).unwrap();
    let c = Constants::LAB_WIDE;
    let (n, m) = (200_000, 400);
    let init = random_configuration(n, &mut rng).unwrap();
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    let mut wide_ok = true;
    for eps in [0.2, 0.25, 0.3, 0.35, 0.4] {
        if plan_wide(n, m, eps, meta.k(), &c).unwrap().is_none() {
            wide_ok = false;
            continue;
        }
        let mut oracle = QueryOracle::new(LazyEvolution::new(init.clone(), meta.rule(), m).unwrap()).with_log();
        let r = test_wide(&mut oracle, &meta, eps, &c, &mut rng);
        match conf.record(r, &oracle) {
            Some(v) if v.variant == Variant::Wide && v.accepted() => {
                let total = v.stats.total as f64;
                worst = worst.max(total * eps.powi(4));
                points.push((eps.ln(), total.ln()));
            }
            _ => wide_ok = false,
        }
    }
    let slope = if points.len() >= 2 { least_squares_slope(&points) } else { f64::NAN };
    let slope_ok = wide_ok && (slope + 4.0).abs() <= 0.3;
    let pass = mismatches.is_empty() && paper_total == 14760 && slope_ok && conf.violations == 0;
    Outcome::new(
        pass,
        format!(
            "closed form exact on {checked} grid runs (n=m=9600 eps=0.1: {paper_total}), mismatches {mismatches:?}; \
             wide slope {slope:.3}, max total*eps^4 = {worst:.0}; conformity violations {} in {} runs",
            conf.violations, conf.runs
        ),
    )
}

fn structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6);
    let (mut grids, mut overlaps, mut u_over, mut violations) = (0, 0, 0, 0);
    let mut seen = [0u64; 4];
    for trial in 0..200 {
        let meta = builtin_meta(META_RULES[trial % 6]).unwrap();
        let (n, m) = (rng.gen_range(150..500), rng.gen_range(80..300));
        let eps = rng.gen_range(0.15..0.6);
        let c = if trial % 2 == 0 { Constants::LAB } else { Constants::PAPER };
        let block = rng.gen_range(0..m);
        let env = evolving(&meta, n, m, block, &mut rng);
        let Some(cs) = census(&meta, &env, eps, &c) else { continue };
        grids += 1;
        overlaps += cs.overlaps;
        violations += cs.violations;
        u_over += ((cs.counts[3] as f64) > cs.u_bound) as u64;
        for (s, c) in seen.iter_mut().zip(cs.counts) {
            *s += c;
        }
    }
    let mut runs = Vec::new();
    for name in META_RULES {
        let meta = builtin_meta(name).unwrap();
        if !check_final_run_length(&meta, 14).passed() {
            runs.push(name.to_string());
        }
    }
    let pass = grids >= 100 && overlaps == 0 && u_over == 0 && violations == 0 && runs.is_empty();
    Outcome::new(
        pass,
        format!(
            "{grids} feasible grids, A/B/C/U pairs {seen:?}, overlaps {overlaps}, U over bound {u_over}, \
             requirement failures {violations}; short final runs (n<=14) {runs:?}"
        ),
    )
}

fn brute_sanity() -> Outcome {
    let mut failures = Vec::new();
    let mut envs = 0u64;
    for name in RuleName::ALL {
        let rule = name.rule();
        for n in 3..=12 {
            for x in 0..1u64 << n {
                let env = evolve(&Configuration::from_u64(n, x).unwrap(), rule, 6).unwrap();
                envs += 1;
                if *exact_distance(&env, rule).unwrap().distance.numer() != 0 {
                    failures.push(format!("{name} n={n} init={x:b}"));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7);
    let mut flips = 0;
    for trial in 0..400 {
        let name = RuleName::ALL[trial % RuleName::ALL.len()];
        let rule = name.rule();
        let (n, m) = (rng.gen_range(3..=12), rng.gen_range(2..10));
        let mut x = rng.gen::<u64>() & ((1 << n) - 1);
        let mut rows = Vec::new();
        for _ in 0..m {
            rows.push(x);
            x = evolve_small(x, n, rule);
        }
        let (t, i) = (rng.gen_range(1..m), rng.gen_range(0..n));
        rows[t] ^= 1 << i;
        let rows: Vec<Configuration> = rows.iter().map(|&r| Configuration::from_u64(n, r).unwrap()).collect();
        let env = Environment::from_rows(rows).unwrap();
        let d = exact_distance(&env, rule).unwrap().distance;
        flips += 1;
        if (*d.numer(), *d.denom()) != (1, (m * n) as u64) {
            failures.push(format!("{name} n={n} m={m} flip ({t},{i}): {d}"));
        }
    }
    let mut periods = Vec::new();
    for n in 3..=16 {
        let p = period(RuleName::Or.rule(), n).unwrap();
        if p != 1 {
            periods.push(format!("OR n={n}: {p}"));
        }
        if n % 2 == 0 {
            let p = period(RuleName::Maj.rule(), n).unwrap();
            if p != 2 {
                periods.push(format!("MAJ n={n}: {p}"));
            }
        }
    }
    failures.truncate(5);
    let pass = failures.is_empty() && periods.is_empty();
    Outcome::new(
        pass,
        format!(
            "{envs} evolutions at distance 0, {flips} single flips at 1/(mn), periods n=3..16; failures {failures:?} {periods:?}"
        ),
    )
}

type Criterion = Box<dyn FnOnce(&mut Conformity) -> Outcome>;

fn main() -> ExitCode {
    let mut conf = Conformity::default();
    let criteria: [(&str, Criterion); 7] = [
        ("1 condition certification", Box::new(|_| conditions())),
        ("2 completeness", Box::new(completeness)),
        ("3 soundness", Box::new(|_| soundness())),
        ("4 oracle equivalence", Box::new(|_| oracle_equivalence())),
        ("5 query accounting", Box::new(query_accounting)),
        ("6 structural claims", Box::new(|_| structure())),
        ("7 brute-force sanity", Box::new(|_| brute_sanity())),
    ];
    let mut failed = 0;
    for (label, run) in criteria {
        let start = Instant::now();
        let o = run(&mut conf);
        failed += !o.pass as usize;
        println!(
            "{} criterion {label} [{:.1?}]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
