use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ecatest::brute::{exact_distance, make_far, period, FarStrategy};
use ecatest::format::{load, write_binary, write_text};
use ecatest::lab::{evolving_instance, run_experiment, run_tester, ExperimentSpec, Strategy, VariantChoice};
use ecatest::rules::{builtin_meta_by_str, TestTarget};
use ecatest::tester::Profile;
use ecatest::verify::{mutate, verify_all, Bounds, CondOutcome, Mutation};
use ecatest::{evolve, parse_rule, Configuration, Environment, QueryOracle, Rule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "ecatest", version, about = "Test space-time matrices against elementary CA rules")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Constant set for the testers.
    #[arg(long, global = true, default_value = "paper")]
    profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tester on a stored environment. Exit 0 on accept, 1 on reject.
    Test {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "auto")]
        variant: VariantChoice,
    },
    /// Check the six conditions for a rule's metadata.
    Verify {
        #[arg(long)]
        rule: String,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long, default_value_t = 12)]
        mmax: usize,
        /// Break the metadata first (swap-partition, identity-prediction).
        #[arg(long)]
        mutation: Option<Mutation>,
    },
    /// Exact distance of a stored environment to the rule's evolutions.
    Distance {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        env: PathBuf,
    },
    /// Longest cycle of the rule's dynamics on the n-ring.
    Period {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        n: usize,
    },
    /// Generate and certify an instance far from evolving under the rule.
    Genfar {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "complement-suffix")]
        strategy: FarStrategy,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run an experiment spec and print the summary table.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Per-trial records as CSV.
        #[arg(long)]
        trials_out: Option<PathBuf>,
        /// Ignore the spec's seed and use --seed.
        #[arg(long)]
        reseed: bool,
    },
    /// Evolve an initial configuration and write the environment.
    Evolve {
        #[arg(long)]
        rule: String,
        /// random, structured:<block>, or a 0/1 string.
        #[arg(long, default_value = "random")]
        init: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Test { rule, env, eps, variant } => {
            let target = TestTarget::parse(rule)?;
            let file = load(env).with_context(|| format!("reading {}", env.display()))?;
            let mut oracle = QueryOracle::new(&file.env);
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let verdict = run_tester(&mut oracle, &target, *variant, *eps, cli.profile, &mut rng)?;
            if cli.json {
                println!("{}", serde_json::to_string(&verdict)?);
            } else {
                let reason = verdict.reason.map(|r| format!(" ({})", r.label())).unwrap_or_default();
                println!(
                    "{:?}{reason} variant={} queries={} temporal={}",
                    verdict.decision,
                    verdict.variant.as_str(),
                    verdict.stats.total,
                    verdict.stats.temporal_max
                );
            }
            Ok(ExitCode::from(if verdict.accepted() { 0 } else { 1 }))
        }
        Command::Verify {
            rule,
            nmax,
            mmax,
            mutation,
        } => {
            let mut meta = builtin_meta_by_str(rule)?;
            if let Some(m) = mutation {
                meta = mutate(&meta, *m);
            }
            let outcomes = verify_all(
                &meta,
                Bounds {
                    n_max: *nmax,
                    m_max: *mmax,
                },
            );
            let all_pass = outcomes.iter().all(|(_, o)| o.passed());
            if cli.json {
                let rows: Vec<_> = outcomes
                    .iter()
                    .map(|(c, o)| match o {
                        CondOutcome::Pass => json!({"condition": c, "outcome": "Pass"}),
                        CondOutcome::Fail(x) => {
                            json!({"condition": c, "outcome": "Fail", "counterexample": x.to_string()})
                        }
                    })
                    .collect();
                println!("{}", serde_json::to_string(&json!({"rule": meta.name(), "conditions": rows}))?);
            } else {
                println!("rule {}", meta.name());
                for (c, o) in &outcomes {
                    match o {
                        CondOutcome::Pass => println!("  condition {c}: Pass"),
                        CondOutcome::Fail(x) => println!("  condition {c}: Fail  {x}"),
                    }
                }
            }
            Ok(ExitCode::from(if all_pass { 0 } else { 1 }))
        }
        Command::Distance { rule, env } => {
            let rule = parse_rule(rule)?;
            let file = load(env).with_context(|| format!("reading {}", env.display()))?;
            let report = exact_distance(&file.env, rule)?;
            if cli.json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                println!(
                    "distance {} ({:.6}) nearest initial {} ties {}",
                    report.distance,
                    *report.distance.numer() as f64 / *report.distance.denom() as f64,
                    report.argmin_initial,
                    report.ties
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Period { rule, n } => {
            let p = period(parse_rule(rule)?, *n)?;
            if cli.json {
                println!("{}", json!({"rule": rule, "n": n, "period": p}));
            } else {
                println!("{p}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Genfar {
            rule,
            n,
            m,
            eps,
            strategy,
            out,
            format,
        } => {
            let rule = parse_rule(rule)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let (env, cert) = make_far(rule, *n, *m, *eps, &mut rng, *strategy)?;
            write_env(&env, Some(rule), out.as_deref(), *format)?;
            let text = if cli.json {
                serde_json::to_string(&cert)?
            } else {
                format!(
                    "{:?} distance >= {}/{} certified={}",
                    cert.method, cert.distance_numer, cert.distance_denom, cert.certified
                )
            };
            // Keep stdout clean when the environment itself goes there.
            if out.is_some() {
                println!("{text}");
            } else {
                eprintln!("{text}");
            }
            Ok(ExitCode::from(if cert.certified { 0 } else { 1 }))
        }
        Command::Experiment {
            spec,
            trials_out,
            reseed,
        } => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut spec = ExperimentSpec::from_toml(&text)?;
            if *reseed {
                spec.seed = cli.seed;
            }
            let table = run_experiment(&spec)?;
            let stdout = io::stdout().lock();
            if cli.json {
                table.write_json(stdout)?;
            } else {
                table.write_csv(stdout)?;
            }
            if let Some(path) = trials_out {
                table.write_trials_csv(File::create(path)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve {
            rule,
            init,
            n,
            m,
            out,
            format,
        } => {
            let env = evolve_command(rule, init, *n, *m, cli.seed)?;
            write_env(&env, Some(parse_rule(rule)?), out.as_deref(), *format)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn evolve_command(rule: &str, init: &str, n: Option<usize>, m: usize, seed: u64) -> Result<Environment> {
    if init.chars().all(|c| c == '0' || c == '1') {
        let config: Configuration = init.parse()?;
        if n.is_some_and(|n| n != config.len()) {
            bail!("--n disagrees with the length of --init");
        }
        return Ok(evolve(&config, parse_rule(rule)?, m)?);
    }
    let n = n.context("--n is required unless --init is a bit string")?;
    let strategy: Strategy = init.parse()?;
    if let Strategy::Far(_) = strategy {
        bail!("--init must be random, structured:<block> or a bit string");
    }
    let target = match TestTarget::parse(rule) {
        Ok(t) => t,
        Err(_) => return evolve_plain(parse_rule(rule)?, n, m, seed),
    };
    Ok(evolving_instance(&target, n, m, &strategy, seed)?.0)
}

// Rules without tester metadata still evolve from random initial rows.
fn evolve_plain(rule: Rule, n: usize, m: usize, seed: u64) -> Result<Environment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(evolve(&ecatest::random_configuration(n, &mut rng)?, rule, m)?)
}

fn write_env(env: &Environment, rule: Option<Rule>, out: Option<&Path>, format: Option<Format>) -> Result<()> {
    let format = format.unwrap_or(match out.and_then(|p| p.extension()) {
        Some(ext) if ext == "bin" => Format::Binary,
        _ => Format::Text,
    });
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match format {
        Format::Text => write_text(&mut sink, env, rule)?,
        Format::Binary => write_binary(&mut sink, env)?,
    }
    sink.flush()?;
    Ok(())
}
