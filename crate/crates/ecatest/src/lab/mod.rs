//! Batch experiments: seeded trials over grids of rules, sizes, distances and
//! instance strategies, summarized into CSV or JSON tables.

mod output;

use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{CellResult, ResultTable, TrialRecord};

use crate::brute::{make_far, Certificate, FarStrategy};
use crate::rules::{structured_configuration, TestTarget};
use crate::tester::{plan_wide, test, test_fallback, test_trivial, test_wide, Profile, RejectReason, Verdict};
use crate::{evolve, mix, random_configuration, Configuration, Environment, LabError, LazyEvolution, QueryOracle};

/// How many times a far strategy may be redrawn before giving up on a
/// certified instance.
pub const CERTIFY_ATTEMPTS: usize = 32;

/// Which tester a trial runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    /// The interval variant when it applies, else the grid tester; trivial
    /// rules always use their own tester.
    #[default]
    Auto,
    Grid,
    Wide,
    Fallback,
}

impl FromStr for VariantChoice {
    type Err = LabError;

    fn from_str(s: &str) -> Result<VariantChoice, LabError> {
        match s {
            "auto" => Ok(VariantChoice::Auto),
            "grid" => Ok(VariantChoice::Grid),
            "wide" => Ok(VariantChoice::Wide),
            "fallback" => Ok(VariantChoice::Fallback),
            other => Err(LabError::Spec(format!("unknown variant {other:?}"))),
        }
    }
}

/// Instances a cell is run on.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// Evolution of a uniformly random initial configuration.
    Evolving,
    /// Evolution of a configuration made of long final and non-final blocks.
    Structured { block: usize },
    /// A certified far instance.
    Far(FarStrategy),
}

impl FromStr for Strategy {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Strategy, LabError> {
        match s.split_once(':') {
            None if s == "evolving" || s == "random" => Ok(Strategy::Evolving),
            Some(("structured", b)) => b
                .parse()
                .map(|block| Strategy::Structured { block })
                .map_err(|_| LabError::Spec(format!("bad block length in {s:?}"))),
            _ => Ok(Strategy::Far(s.parse()?)),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Evolving => f.write_str("evolving"),
            Strategy::Structured { block } => write!(f, "structured:{block}"),
            Strategy::Far(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

/// A declarative experiment, usually read from TOML:
///
/// ```toml
/// rule = ["maj", "min"]
/// eps = [0.1, 0.2]
/// sizes = [[20, 40]]          # [n, m]
/// trials = 200
/// strategy = ["evolving", "wrong-rule:min"]
/// profile = "lab"
/// seed = 7
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub rule: OneOrMany<String>,
    pub eps: Vec<f64>,
    pub sizes: Vec<[usize; 2]>,
    pub trials: usize,
    #[serde(default = "default_strategy")]
    pub strategy: OneOrMany<String>,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub variant: VariantChoice,
    /// Record wall time. Off makes the output depend on the seed only.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Distinct instances per cell, reused round-robin; all trials get their
    /// own instance when absent.
    #[serde(default)]
    pub instances: Option<usize>,
}

fn default_strategy() -> OneOrMany<String> {
    OneOrMany::One("evolving".into())
}

fn default_true() -> bool {
    true
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<ExperimentSpec, LabError> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |msg: String| Err(LabError::Spec(msg));
        if self.rule.to_vec().is_empty() || self.eps.is_empty() || self.sizes.is_empty() {
            return bad("rule, eps and sizes must be nonempty".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("eps {e} outside (0, 1)"));
        }
        if let Some([n, m]) = self.sizes.iter().find(|[n, m]| *n < 3 || *m < 2) {
            return bad(format!("size [{n}, {m}] too small"));
        }
        if self.instances == Some(0) {
            return bad("instances must be positive".into());
        }
        for r in self.rule.to_vec() {
            TestTarget::parse(&r)?;
        }
        for s in self.strategy.to_vec() {
            s.parse::<Strategy>()?;
        }
        Ok(())
    }
}

/// One `(rule, n, m, eps, strategy)` combination.
#[derive(Clone, Debug)]
struct Cell {
    index: u64,
    target: TestTarget,
    n: usize,
    m: usize,
    eps: f64,
    strategy: Strategy,
}

enum Instance {
    Evolving(Configuration),
    Far(Environment, Certificate),
}

// Instance and trial seeds live in disjoint streams.
const INSTANCE_STREAM: u64 = 1 << 63;

fn build_instance(cell: &Cell, seed: u64) -> Result<Instance, LabError> {
    let rule = cell.target.rule();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match &cell.strategy {
        Strategy::Evolving => Ok(Instance::Evolving(random_configuration(cell.n, &mut rng)?)),
        Strategy::Structured { block } => match &cell.target {
            TestTarget::Meta(meta) => Ok(Instance::Evolving(structured_configuration(meta, cell.n, *block, &mut rng)?)),
            TestTarget::Trivial(_) => Ok(Instance::Evolving(random_configuration(cell.n, &mut rng)?)),
        },
        Strategy::Far(strategy) => {
            for _ in 0..CERTIFY_ATTEMPTS {
                let (env, cert) = make_far(rule, cell.n, cell.m, cell.eps, &mut rng, *strategy)?;
                if cert.certified {
                    return Ok(Instance::Far(env, cert));
                }
            }
            Err(LabError::Uncertified(format!(
                "{} n={} m={} eps={} strategy={}",
                cell.target.name(),
                cell.n,
                cell.m,
                cell.eps,
                strategy
            )))
        }
    }
}

/// Runs the tester selected by `choice` on a fresh oracle.
pub fn run_tester(
    oracle: &mut QueryOracle,
    target: &TestTarget,
    choice: VariantChoice,
    eps: f64,
    profile: Profile,
    rng: &mut ChaCha8Rng,
) -> Result<Verdict, LabError> {
    let (c, wide) = (profile.constants(), profile.wide_constants());
    let verdict = match (target, choice) {
        (_, VariantChoice::Fallback) => test_fallback(oracle, target.rule(), eps, &c, rng)?,
        (TestTarget::Trivial(t), _) => test_trivial(oracle, *t, eps, &c, rng)?,
        (TestTarget::Meta(meta), VariantChoice::Grid) => test(oracle, meta, eps, &c, rng)?,
        (TestTarget::Meta(meta), VariantChoice::Wide) => test_wide(oracle, meta, eps, &wide, rng)?,
        (TestTarget::Meta(meta), VariantChoice::Auto) => {
            if plan_wide(oracle.n(), oracle.m(), eps, meta.k(), &wide)?.is_some() {
                test_wide(oracle, meta, eps, &wide, rng)?
            } else {
                test(oracle, meta, eps, &c, rng)?
            }
        }
    };
    Ok(verdict)
}

fn run_trial(
    cell: &Cell,
    instance: &Instance,
    trial: usize,
    seed: u64,
    spec: &ExperimentSpec,
) -> Result<TrialRecord, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let (verdict, distance) = match instance {
        Instance::Evolving(init) => {
            let source = LazyEvolution::new(init.clone(), cell.target.rule(), cell.m)?;
            let mut oracle = QueryOracle::new(source);
            let v = run_tester(&mut oracle, &cell.target, spec.variant, cell.eps, spec.profile, &mut rng)?;
            (v, 0.0)
        }
        Instance::Far(env, cert) => {
            let mut oracle = QueryOracle::new(env);
            let v = run_tester(&mut oracle, &cell.target, spec.variant, cell.eps, spec.profile, &mut rng)?;
            (v, cert.distance())
        }
    };
    let ms = if spec.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let (class, requirement) = match verdict.reason {
        Some(RejectReason::Violation { class, requirement, .. }) => (class.letter().to_string(), requirement.to_string()),
        Some(other) => ("-".into(), other.label()),
        None => (String::new(), String::new()),
    };
    Ok(TrialRecord {
        rule: cell.target.name(),
        strategy: cell.strategy.to_string(),
        n: cell.n,
        m: cell.m,
        eps: cell.eps,
        trial,
        seed,
        decision: if verdict.accepted() { "accept" } else { "reject" }.into(),
        variant: verdict.variant.as_str().into(),
        class,
        requirement,
        queries: verdict.stats.total,
        temporal: verdict.stats.temporal_max,
        distance,
        ms,
    })
}

fn cells(spec: &ExperimentSpec) -> Result<Vec<Cell>, LabError> {
    let mut out = Vec::new();
    for rule in spec.rule.to_vec() {
        let target = TestTarget::parse(&rule)?;
        for &[n, m] in &spec.sizes {
            for &eps in &spec.eps {
                for s in spec.strategy.to_vec() {
                    out.push(Cell {
                        index: out.len() as u64,
                        target: target.clone(),
                        n,
                        m,
                        eps,
                        strategy: s.parse()?,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Runs every cell of `spec`. Trials run in parallel; each derives its
/// seed from the master seed, the cell index and the trial index, so the
/// result does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable, LabError> {
    spec.validate()?;
    let mut table = ResultTable::default();
    for cell in cells(spec)? {
        let count = spec.instances.unwrap_or(spec.trials).min(spec.trials);
        let instances = (0..count as u64)
            .into_par_iter()
            .map(|j| build_instance(&cell, mix(spec.seed, mix(cell.index, INSTANCE_STREAM | j))))
            .collect::<Result<Vec<_>, _>>()?;
        let trials = (0..spec.trials)
            .into_par_iter()
            .map(|j| {
                let seed = mix(spec.seed, mix(cell.index, j as u64));
                run_trial(&cell, &instances[j % count], j, seed, spec)
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.push_cell(spec, &trials);
        table.trials.extend(trials);
    }
    Ok(table)
}

/// An evolution materialized for the `evolve` command and examples.
pub fn evolving_instance(
    target: &TestTarget,
    n: usize,
    m: usize,
    strategy: &Strategy,
    seed: u64,
) -> Result<(Environment, Option<Certificate>), LabError> {
    let cell = Cell {
        index: 0,
        target: target.clone(),
        n,
        m,
        eps: 0.5,
        strategy: strategy.clone(),
    };
    match build_instance(&cell, seed)? {
        Instance::Evolving(init) => Ok((evolve(&init, target.rule(), m)?, None)),
        Instance::Far(env, cert) => Ok((env, Some(cert))),
    }
}
