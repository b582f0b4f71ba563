//! Testing whether a space-time binary matrix evolves according to an
//! elementary cellular-automaton rule, with exhaustive oracles to check the
//! tester against.

pub mod brute;
mod config;
mod env;
mod error;
pub mod format;
pub mod lab;
pub mod oracle;
mod ring;
mod rule;
pub mod rules;
pub mod tester;
pub mod verify;

pub use config::{evolve_small, Configuration};
pub use env::{env_distance, evolve, mix, random_configuration, Environment, LazyEvolution, Noisy, RowSource};
pub use error::{BruteError, CoreError, LabError, OracleError, RuleError, TesterError};
pub use ring::{descends, Ring, TimeLocation};
pub use rule::{parse_rule, Rule, RuleName};
pub use oracle::{QueryOracle, QueryStats};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/lab.md")]
    mod lab {}
}
