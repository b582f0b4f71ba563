//! Time-conforming query access with accounting.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::rules::Pattern;
use crate::{Configuration, OracleError, RowSource, TimeLocation};

/// Counters of an oracle's lifetime.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub total: u64,
    /// Largest number of queries made at a single time step.
    pub temporal_max: u64,
    pub per_time: BTreeMap<usize, u64>,
}

/// Wraps a row source and refuses queries that go back in time.
pub struct QueryOracle<'a> {
    source: Box<dyn RowSource + Send + 'a>,
    floor: usize,
    total: u64,
    per_time: BTreeMap<usize, u64>,
    cached: Option<(usize, Configuration)>,
    log: Option<Vec<TimeLocation>>,
}

impl<'a> QueryOracle<'a> {
    pub fn new<S: RowSource + Send + 'a>(source: S) -> QueryOracle<'a> {
        QueryOracle {
            source: Box::new(source),
            floor: 0,
            total: 0,
            per_time: BTreeMap::new(),
            cached: None,
            log: None,
        }
    }

    /// Records every query in order, for replay comparisons.
    pub fn with_log(mut self) -> QueryOracle<'a> {
        self.log = Some(Vec::new());
        self
    }

    pub fn n(&self) -> usize {
        self.source.n()
    }

    pub fn m(&self) -> usize {
        self.source.m()
    }

    pub fn time_floor(&self) -> usize {
        self.floor
    }

    pub fn query(&mut self, t: usize, i: usize) -> Result<bool, OracleError> {
        let (m, n) = (self.m(), self.n());
        if t >= m || i >= n {
            return Err(OracleError::OutOfRange { t, i, m, n });
        }
        if t < self.floor {
            return Err(OracleError::TimeConformityViolation { t, floor: self.floor });
        }
        self.floor = t;
        if self.cached.as_ref().map(|(ct, _)| *ct) != Some(t) {
            let row = self.source.row(t)?;
            self.cached = Some((t, row));
        }
        self.total += 1;
        *self.per_time.entry(t).or_insert(0) += 1;
        if let Some(log) = &mut self.log {
            log.push(TimeLocation::new(t, i));
        }
        Ok(self.cached.as_ref().expect("row cached above").1.get(i))
    }

    /// Reads `[i - r, i + r]` at time `t` (wrapping), counting `2r + 1` queries.
    pub fn query_window(&mut self, t: usize, i: usize, r: usize) -> Result<Pattern, OracleError> {
        let n = self.n();
        if 2 * r + 1 > n {
            return Err(crate::CoreError::InvalidRadius { r, n }.into());
        }
        let mut bits = 0u32;
        for d in 0..=2 * r {
            let j = (i as i64 + d as i64 - r as i64).rem_euclid(n as i64) as usize;
            bits = bits << 1 | self.query(t, j)? as u32;
        }
        Ok(Pattern::new(bits, 2 * r + 1))
    }

    pub fn stats(&self) -> QueryStats {
        QueryStats {
            total: self.total,
            temporal_max: self.per_time.values().copied().max().unwrap_or(0),
            per_time: self.per_time.clone(),
        }
    }

    pub fn log(&self) -> Option<&[TimeLocation]> {
        self.log.as_deref()
    }
}
