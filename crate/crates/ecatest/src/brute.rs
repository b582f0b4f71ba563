//! Exhaustive ground truth for small rings: exact distances, reachable sets,
//! cycle lengths, and generation of certified far instances.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::tester::GridView;
use crate::{evolve, evolve_small, parse_rule, random_configuration, BruteError, Configuration, Environment, Rule};

pub const MAX_DISTANCE_N: usize = 24;
pub const MAX_FEASIBLE_N: usize = 20;
pub const MAX_PERIOD_N: usize = 20;

fn guard(n: usize, max: usize) -> Result<(), BruteError> {
    if n > max {
        Err(BruteError::Budget { n, max })
    } else {
        Ok(())
    }
}

/// Key ordering configurations as strings, location 0 first.
fn lex_key(x: u64, n: usize) -> u64 {
    x.reverse_bits() >> (64 - n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceReport {
    pub distance: Ratio<u64>,
    pub argmin_initial: Configuration,
    /// Number of initial configurations attaining the minimum.
    pub ties: u64,
}

/// Minimum normalized Hamming distance from `env` to an evolution under `rule`.
pub fn exact_distance(env: &Environment, rule: Rule) -> Result<DistanceReport, BruteError> {
    let (n, m) = (env.n(), env.m());
    guard(n, MAX_DISTANCE_N)?;
    let rows: Vec<u64> = env.rows().iter().map(Configuration::to_u64).collect();
    // The evolution of row 0 gives a starting bound; it is enumerated again
    // below, so ties and the argmin stay exact.
    let from_row0 = rows
        .iter()
        .scan(rows[0], |x, &row| {
            let d = (*x ^ row).count_ones() as u64;
            *x = evolve_small(*x, n, rule);
            Some(d)
        })
        .sum::<u64>();
    let best = AtomicU64::new(from_row0);
    const CHUNK: u64 = 1 << 14;
    let total = 1u64 << n;
    let (dist, ties, key) = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut local = (u64::MAX, 0u64, u64::MAX);
            for g in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                let x0 = g ^ (g >> 1);
                let bound = best.load(Ordering::Relaxed);
                let mut x = x0;
                let mut d = 0u64;
                for (t, &row) in rows.iter().enumerate() {
                    if t > 0 {
                        x = evolve_small(x, n, rule);
                    }
                    d += (x ^ row).count_ones() as u64;
                    if d > bound {
                        break;
                    }
                }
                if d > bound {
                    continue;
                }
                let key = lex_key(x0, n);
                match d.cmp(&local.0) {
                    std::cmp::Ordering::Less => local = (d, 1, key),
                    std::cmp::Ordering::Equal => {
                        local.1 += 1;
                        local.2 = local.2.min(key);
                    }
                    std::cmp::Ordering::Greater => {}
                }
                best.fetch_min(d, Ordering::Relaxed);
            }
            local
        })
        .reduce(
            || (u64::MAX, 0, u64::MAX),
            |a, b| match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => (a.0, a.1 + b.1, a.2.min(b.2)),
            },
        );
    let argmin = lex_key(key, n);
    Ok(DistanceReport {
        distance: Ratio::new(dist, (m * n) as u64),
        argmin_initial: Configuration::from_u64(n, argmin)?,
        ties,
    })
}

/// All configurations reachable after exactly `t` steps on the `n`-ring.
#[derive(Clone, Debug)]
pub struct ImageSet {
    n: usize,
    members: Vec<u64>,
}

impl ImageSet {
    pub fn new(rule: Rule, n: usize, t: usize) -> Result<ImageSet, BruteError> {
        guard(n, MAX_FEASIBLE_N)?;
        let size = 1usize << n;
        let mut cur = vec![true; size];
        for _ in 0..t {
            let mut next = vec![false; size];
            for x in (0..size).filter(|&x| cur[x]) {
                next[evolve_small(x as u64, n, rule) as usize] = true;
            }
            if next == cur {
                break;
            }
            cur = next;
        }
        let members = (0..size as u64).filter(|&x| cur[x as usize]).collect();
        Ok(ImageSet { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, x: u64) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// Whether some member agrees with `value` on the bits of `mask`.
    pub fn matches(&self, mask: u64, value: u64) -> bool {
        self.members.iter().any(|&x| x & mask == value & mask)
    }
}

/// Ring cells fixed by a grid view, as `(mask, value)`; `None` on a conflict.
pub fn grid_mask(gv: &GridView) -> Option<(u64, u64)> {
    let cells = gv.cells().ok()?;
    let n = gv.n();
    let (mut mask, mut value) = (0u64, 0u64);
    for (j, c) in cells.cells.iter().enumerate() {
        if let Some(b) = c {
            let loc = (cells.start + j) % n;
            mask |= 1 << loc;
            value |= (*b as u64) << loc;
        }
    }
    Some((mask, value))
}

/// Whether some evolution under `rule` matches the grid view at time `t1`.
pub fn feasible(gv: &GridView, rule: Rule) -> Result<bool, BruteError> {
    guard(gv.n(), MAX_FEASIBLE_N)?;
    let Some((mask, value)) = grid_mask(gv) else {
        return Ok(false);
    };
    Ok(ImageSet::new(rule, gv.n(), gv.t1())?.matches(mask, value))
}

/// Longest cycle of the rule's global map on the `n`-ring.
pub fn period(rule: Rule, n: usize) -> Result<usize, BruteError> {
    guard(n, MAX_PERIOD_N)?;
    Configuration::zeros(n)?;
    let size = 1usize << n;
    const FRESH: u32 = u32::MAX;
    let mut walk_of = vec![FRESH; size];
    let mut step_of = vec![0u32; size];
    let mut longest = 0;
    for start in 0..size {
        if walk_of[start] != FRESH {
            continue;
        }
        let mut x = start;
        let mut step = 0u32;
        while walk_of[x] == FRESH {
            walk_of[x] = start as u32;
            step_of[x] = step;
            step += 1;
            x = evolve_small(x as u64, n, rule) as usize;
        }
        if walk_of[x] == start as u32 {
            longest = longest.max((step - step_of[x]) as usize);
        }
    }
    Ok(longest)
}

/// How a far instance is built from evolutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FarStrategy {
    /// Evolution with rows from `from` (default `ceil(m/2)`) complemented.
    ComplementSuffix { from: Option<usize> },
    /// First half from one evolution, second half from another.
    Splice,
    /// Evolution with every cell flipped independently with probability `p`.
    Noise { p: f64 },
    /// Evolution under a different rule.
    WrongRule { rule: Rule },
}

impl fmt::Display for FarStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FarStrategy::ComplementSuffix { from: None } => f.write_str("complement-suffix"),
            FarStrategy::ComplementSuffix { from: Some(t) } => write!(f, "complement-suffix:{t}"),
            FarStrategy::Splice => f.write_str("splice"),
            FarStrategy::Noise { p } => write!(f, "noise:{p}"),
            FarStrategy::WrongRule { rule } => write!(f, "wrong-rule:{rule}"),
        }
    }
}

impl FromStr for FarStrategy {
    type Err = BruteError;

    fn from_str(s: &str) -> Result<FarStrategy, BruteError> {
        let bad = || BruteError::Strategy(s.to_string());
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("complement-suffix", None) => Ok(FarStrategy::ComplementSuffix { from: None }),
            ("complement-suffix", Some(a)) => Ok(FarStrategy::ComplementSuffix {
                from: Some(a.parse().map_err(|_| bad())?),
            }),
            ("splice", None) => Ok(FarStrategy::Splice),
            ("noise", Some(a)) => {
                let p: f64 = a.parse().map_err(|_| bad())?;
                if (0.0..=1.0).contains(&p) {
                    Ok(FarStrategy::Noise { p })
                } else {
                    Err(bad())
                }
            }
            ("wrong-rule", Some(a)) => Ok(FarStrategy::WrongRule { rule: parse_rule(a)? }),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMethod {
    Exact,
    /// Disjoint rule-violating patches, each forcing one change.
    DisjointPatches,
}

/// Evidence that an instance is far from evolving under a rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub rule: String,
    pub strategy: String,
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub method: CertificateMethod,
    /// Exact distance, or a lower bound on it.
    pub distance_numer: u64,
    pub distance_denom: u64,
    pub certified: bool,
}

impl Certificate {
    pub fn distance(&self) -> f64 {
        self.distance_numer as f64 / self.distance_denom as f64
    }
}

/// Number of disjoint one-step violations: patches `(r, j-1..=j+1) -> (r+1, j)`
/// with `j` congruent to `a + 2r` mod 4, maximized over `a`.
pub fn patch_violations(env: &Environment, rule: Rule) -> u64 {
    let n = env.n();
    (0..4)
        .map(|a| {
            let mut count = 0;
            for r in 0..env.m().saturating_sub(1) {
                let (row, next) = (env.row(r), env.row(r + 1));
                let mut j = (a + 2 * r) % 4;
                if j == 0 {
                    j = 4;
                }
                while j + 1 < n {
                    if rule.apply(row.get(j - 1), row.get(j), row.get(j + 1)) != next.get(j) {
                        count += 1;
                    }
                    j += 4;
                }
            }
            count
        })
        .max()
        .unwrap_or(0)
}

/// Certificate for an arbitrary environment: exact when enumerable, else the
/// patch lower bound.
pub fn certify(env: &Environment, rule: Rule, eps: f64, strategy: &str) -> Result<Certificate, BruteError> {
    let (n, m) = (env.n(), env.m());
    let (method, distance) = if n <= MAX_DISTANCE_N {
        (CertificateMethod::Exact, exact_distance(env, rule)?.distance)
    } else {
        (
            CertificateMethod::DisjointPatches,
            Ratio::new(patch_violations(env, rule), (m * n) as u64),
        )
    };
    Ok(Certificate {
        rule: rule.to_string(),
        strategy: strategy.to_string(),
        n,
        m,
        eps,
        method,
        distance_numer: *distance.numer(),
        distance_denom: *distance.denom(),
        certified: *distance.numer() as f64 > eps * *distance.denom() as f64,
    })
}

/// Builds an instance with `strategy` and certifies its distance to `rule`.
pub fn make_far<R: Rng + ?Sized>(
    rule: Rule,
    n: usize,
    m: usize,
    eps: f64,
    rng: &mut R,
    strategy: FarStrategy,
) -> Result<(Environment, Certificate), BruteError> {
    let init = random_configuration(n, rng)?;
    let env = match strategy {
        FarStrategy::ComplementSuffix { from } => {
            let mut env = evolve(&init, rule, m)?;
            for t in from.unwrap_or(m.div_ceil(2))..m {
                *env.row_mut(t) = env.row(t).complement();
            }
            env
        }
        FarStrategy::Splice => {
            let a = evolve(&init, rule, m)?;
            let b = evolve(&random_configuration(n, rng)?, rule, m)?;
            let half = m / 2;
            let rows = a.rows()[..half].iter().chain(&b.rows()[half..]).cloned().collect();
            Environment::from_rows(rows)?
        }
        FarStrategy::Noise { p } => {
            let mut env = evolve(&init, rule, m)?;
            for t in 0..m {
                for i in 0..n {
                    if rng.gen_bool(p) {
                        env.row_mut(t).flip(i);
                    }
                }
            }
            env
        }
        FarStrategy::WrongRule { rule: other } => evolve(&init, other, m)?,
    };
    let cert = certify(&env, rule, eps, &strategy.to_string())?;
    Ok((env, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn evolving_has_distance_zero() {
        let init: Configuration = "011010001110".parse().unwrap();
        let env = evolve(&init, Rule::MAJ, 8).unwrap();
        let r = exact_distance(&env, Rule::MAJ).unwrap();
        assert_eq!(r.distance, Ratio::new(0, 1));
        assert!(r.ties >= 1);
        // Ties go to the lexicographically smallest initial configuration.
        let x = evolve(&r.argmin_initial, Rule::MAJ, 8).unwrap();
        assert_eq!(x, env);
        assert!(r.argmin_initial.to_string() <= init.to_string());
    }

    #[test]
    fn single_flip() {
        let init: Configuration = "0110100011101".parse().unwrap();
        let mut env = evolve(&init, Rule::OR, 6).unwrap();
        env.row_mut(3).flip(5);
        let r = exact_distance(&env, Rule::OR).unwrap();
        assert_eq!(r.distance, Ratio::new(1, 78));
    }

    #[test]
    fn budget() {
        let env = evolve(&Configuration::zeros(25).unwrap(), Rule::OR, 2).unwrap();
        assert!(matches!(
            exact_distance(&env, Rule::OR),
            Err(BruteError::Budget { n: 25, max: 24 })
        ));
    }

    #[test]
    fn periods() {
        assert_eq!(period(Rule::OR, 9).unwrap(), 1);
        assert_eq!(period(Rule::MAJ, 10).unwrap(), 2);
    }

    #[test]
    fn image_of_or_after_one_step_has_no_isolated_ones() {
        let img = ImageSet::new(Rule::OR, 8, 1).unwrap();
        assert!(img.contains(0));
        assert!(img.contains(0b0000_0111));
        assert!(!img.contains(0b0000_0100));
    }

    #[test]
    fn complement_suffix_is_far() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (env, cert) = make_far(
            Rule::MAJ,
            12,
            12,
            0.2,
            &mut rng,
            FarStrategy::ComplementSuffix { from: None },
        )
        .unwrap();
        assert_eq!(env.m(), 12);
        assert_eq!(cert.method, CertificateMethod::Exact);
        assert!(cert.distance() >= 0.25, "{cert:?}");
        assert!(cert.certified);
    }

    #[test]
    fn zero_noise_is_not_far() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, cert) = make_far(Rule::OR, 10, 6, 0.1, &mut rng, FarStrategy::Noise { p: 0.0 }).unwrap();
        assert_eq!(cert.distance(), 0.0);
        assert!(!cert.certified);
    }

    #[test]
    fn patch_bound_is_a_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let (env, cert) = make_far(Rule::MAJ, 14, 8, 0.1, &mut rng, FarStrategy::Noise { p: 0.2 }).unwrap();
            let bound = Ratio::new(patch_violations(&env, Rule::MAJ), 14 * 8);
            assert!(bound <= Ratio::new(cert.distance_numer, cert.distance_denom));
        }
    }

    #[test]
    fn strategy_round_trip() {
        for s in ["complement-suffix", "complement-suffix:4", "splice", "noise:0.3", "wrong-rule:min"] {
            assert_eq!(s.parse::<FarStrategy>().unwrap().to_string(), s);
        }
        assert!("noise:2".parse::<FarStrategy>().is_err());
    }
}
