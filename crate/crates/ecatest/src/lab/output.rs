use std::io::Write;

use serde::Serialize;

use super::ExperimentSpec;
use crate::LabError;

/// One trial. Rejections carry the violating pair's class letter and the
/// failed requirement (`-` and the reason label when no pair is involved).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub rule: String,
    pub strategy: String,
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub trial: usize,
    pub seed: u64,
    pub decision: String,
    pub variant: String,
    pub class: String,
    pub requirement: String,
    pub queries: u64,
    pub temporal: u64,
    /// Certified distance of the instance, 0 for evolutions.
    pub distance: f64,
    pub ms: f64,
}

/// Summary row of one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub rule: String,
    pub variant: String,
    pub profile: String,
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub strategy: String,
    pub trials: usize,
    pub accepts: usize,
    pub rejects: usize,
    pub mean_queries: f64,
    pub max_queries: u64,
    pub mean_temporal: f64,
    pub max_temporal: u64,
    pub mean_ms: f64,
}

impl CellResult {
    pub fn accept_rate(&self) -> f64 {
        self.accepts as f64 / self.trials as f64
    }

    pub fn reject_rate(&self) -> f64 {
        self.rejects as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub cells: Vec<CellResult>,
    pub trials: Vec<TrialRecord>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

impl ResultTable {
    pub(super) fn push_cell(&mut self, spec: &ExperimentSpec, trials: &[TrialRecord]) {
        let first = &trials[0];
        let mut variants: Vec<&str> = trials.iter().map(|t| t.variant.as_str()).collect();
        variants.sort_unstable();
        variants.dedup();
        let accepts = trials.iter().filter(|t| t.decision == "accept").count();
        self.cells.push(CellResult {
            rule: first.rule.clone(),
            variant: variants.join("+"),
            profile: spec.profile.to_string(),
            n: first.n,
            m: first.m,
            eps: first.eps,
            strategy: first.strategy.clone(),
            trials: trials.len(),
            accepts,
            rejects: trials.len() - accepts,
            mean_queries: mean(trials.iter().map(|t| t.queries as f64)),
            max_queries: trials.iter().map(|t| t.queries).max().unwrap_or(0),
            mean_temporal: mean(trials.iter().map(|t| t.temporal as f64)),
            max_temporal: trials.iter().map(|t| t.temporal).max().unwrap_or(0),
            mean_ms: mean(trials.iter().map(|t| t.ms)),
        });
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), LabError> {
        write_rows(w, &self.cells)
    }

    pub fn write_trials_csv<W: Write>(&self, w: W) -> Result<(), LabError> {
        write_rows(w, &self.trials)
    }

    /// The summary rows as a JSON array.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), LabError> {
        serde_json::to_writer_pretty(&mut w, &self.cells)?;
        writeln!(w)?;
        Ok(())
    }
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<(), LabError> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
