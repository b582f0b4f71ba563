//! Environments: materialized, lazily evolved, and noise-wrapped.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Configuration, CoreError, Rule};

/// Row-by-row access to an `m x n` environment.
///
/// Lazy sources only move forward; asking for an earlier row than the last
/// one served is an error.
pub trait RowSource {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn row(&mut self, t: usize) -> Result<Configuration, CoreError>;
}

/// All `m` rows held in memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment {
    n: usize,
    rows: Vec<Configuration>,
}

impl Environment {
    pub fn from_rows(rows: Vec<Configuration>) -> Result<Environment, CoreError> {
        let first = rows.first().ok_or(CoreError::EmptyEnvironment)?;
        let n = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(CoreError::ShapeMismatch {
                left_m: rows.len(),
                left_n: n,
                right_m: rows.len(),
                right_n: bad.len(),
            });
        }
        Ok(Environment { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, t: usize) -> &Configuration {
        &self.rows[t]
    }

    pub fn rows(&self) -> &[Configuration] {
        &self.rows
    }

    pub fn get(&self, t: usize, i: usize) -> bool {
        self.rows[t].get(i)
    }

    pub fn set(&mut self, t: usize, i: usize, b: bool) {
        self.rows[t].set(i, b);
    }

    pub fn row_mut(&mut self, t: usize) -> &mut Configuration {
        &mut self.rows[t]
    }

    pub fn complement(&self) -> Environment {
        Environment {
            n: self.n,
            rows: self.rows.iter().map(Configuration::complement).collect(),
        }
    }

    /// Whether every row after the first follows from its predecessor.
    pub fn evolves_under(&self, rule: Rule) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].evolve_step(rule) == w[1])
    }

    /// Drains any row source into memory.
    pub fn collect<S: RowSource + ?Sized>(source: &mut S) -> Result<Environment, CoreError> {
        let rows = (0..source.m())
            .map(|t| source.row(t))
            .collect::<Result<Vec<_>, _>>()?;
        Environment::from_rows(rows)
    }
}

/// Row 0 is `initial`, row `t` is `evolve_step` applied `t` times.
pub fn evolve(initial: &Configuration, rule: Rule, m: usize) -> Result<Environment, CoreError> {
    if m == 0 {
        return Err(CoreError::EmptyEnvironment);
    }
    let mut rows = Vec::with_capacity(m);
    rows.push(initial.clone());
    for t in 1..m {
        let next = rows[t - 1].evolve_step(rule);
        rows.push(next);
    }
    Environment::from_rows(rows)
}

/// Normalized Hamming distance between two environments of equal shape.
pub fn env_distance(a: &Environment, b: &Environment) -> Result<Ratio<u64>, CoreError> {
    if a.m() != b.m() || a.n() != b.n() {
        return Err(CoreError::ShapeMismatch {
            left_m: a.m(),
            left_n: a.n(),
            right_m: b.m(),
            right_n: b.n(),
        });
    }
    let diff: usize = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(x, y)| x.hamming(y))
        .sum();
    Ok(Ratio::new(diff as u64, (a.m() * a.n()) as u64))
}

impl RowSource for Environment {
    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn row(&mut self, t: usize) -> Result<Configuration, CoreError> {
        self.row_checked(t)
    }
}

impl Environment {
    fn row_checked(&self, t: usize) -> Result<Configuration, CoreError> {
        self.rows.get(t).cloned().ok_or(CoreError::RowOutOfRange {
            t,
            m: self.rows.len(),
        })
    }
}

impl RowSource for &Environment {
    fn n(&self) -> usize {
        self.n
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn row(&mut self, t: usize) -> Result<Configuration, CoreError> {
        self.row_checked(t)
    }
}

/// Evolution generated on demand, holding a single row.
#[derive(Clone, Debug)]
pub struct LazyEvolution {
    rule: Rule,
    m: usize,
    t: usize,
    current: Configuration,
}

impl LazyEvolution {
    pub fn new(initial: Configuration, rule: Rule, m: usize) -> Result<LazyEvolution, CoreError> {
        if m == 0 {
            return Err(CoreError::EmptyEnvironment);
        }
        Ok(LazyEvolution {
            rule,
            m,
            t: 0,
            current: initial,
        })
    }

    /// Number of rows held in memory at any time.
    pub fn resident_rows(&self) -> usize {
        1
    }
}

impl RowSource for LazyEvolution {
    fn n(&self) -> usize {
        self.current.len()
    }

    fn m(&self) -> usize {
        self.m
    }

    fn row(&mut self, t: usize) -> Result<Configuration, CoreError> {
        if t >= self.m {
            return Err(CoreError::RowOutOfRange { t, m: self.m });
        }
        if t < self.t {
            return Err(CoreError::Rewind {
                current: self.t,
                requested: t,
            });
        }
        while self.t < t {
            self.current = self.current.evolve_step(self.rule);
            self.t += 1;
        }
        Ok(self.current.clone())
    }
}

/// Flips each cell of the wrapped source independently with probability `p`.
///
/// The flip mask of row `t` is drawn from a generator seeded by `(seed, t)`,
/// so rows are reproducible in any access order the inner source allows.
#[derive(Clone, Debug)]
pub struct Noisy<S> {
    inner: S,
    p: f64,
    seed: u64,
}

impl<S: RowSource> Noisy<S> {
    pub fn new(inner: S, p: f64, seed: u64) -> Noisy<S> {
        Noisy {
            inner,
            p: p.clamp(0.0, 1.0),
            seed,
        }
    }

    fn mask(&self, t: usize) -> Configuration {
        let n = self.inner.n();
        let mut mask = Configuration::zeros(n).expect("inner source has n >= 3");
        if self.p > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, t as u64));
            for i in 0..n {
                if rng.gen_bool(self.p) {
                    mask.set(i, true);
                }
            }
        }
        mask
    }
}

impl<S: RowSource> RowSource for Noisy<S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn m(&self) -> usize {
        self.inner.m()
    }

    fn row(&mut self, t: usize) -> Result<Configuration, CoreError> {
        let base = self.inner.row(t)?;
        Ok(base.xor(&self.mask(t)))
    }
}

/// SplitMix64-style combination of two words, used to derive independent
/// seeds from a master seed.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A uniformly random configuration.
pub fn random_configuration<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Configuration, CoreError> {
    let words = (0..n.div_ceil(64)).map(|_| rng.gen::<u64>()).collect();
    Configuration::from_words(n, words)
}
