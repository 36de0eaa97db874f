use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{BenchmarkInstance, Family};
use crate::automata::MinMode;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::logic::parse_spec;
use crate::solve::SolverKind;
use crate::synth::synthesize;

pub const CSV_HEADER: &str = "family,size,solver,min_mode,status,realizable,wall_ms,arena_bits,outer_iters,inner_iters,bdd_ops";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Timeout,
    Memout,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub family: Family,
    pub size: usize,
    pub solver: SolverKind,
    pub min_mode: MinMode,
    pub status: Status,
    pub realizable: Option<bool>,
    pub wall_ms: f64,
    pub arena_bits: Option<usize>,
    pub outer_iters: Option<u64>,
    pub inner_iters: Option<u64>,
    pub bdd_ops: Option<u64>,
}

impl Row {
    pub fn empty(job: &Job, status: Status, wall_ms: f64) -> Row {
        Row {
            family: job.family,
            size: job.size,
            solver: job.solver,
            min_mode: job.min_mode,
            status,
            realizable: None,
            wall_ms,
            arena_bits: None,
            outer_iters: None,
            inner_iters: None,
            bdd_ops: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub family: Family,
    pub size: usize,
    pub solver: SolverKind,
    pub min_mode: MinMode,
}

impl Job {
    pub fn instance(&self) -> BenchmarkInstance {
        self.family.generate(self.size)
    }
}

/// Settings of the runner beyond the per-job solver and mode.
pub type RunSettings = RunConfig;

/// Runs one cell in this process. A cell whose wall time exceeds the limit
/// is reported as a timeout; resource caps surface as memout. A strategy
/// failing verification is an error.
pub fn run_job(job: &Job, settings: &RunSettings) -> Row {
    let inst = job.instance();
    let cfg = RunConfig {
        solver: job.solver,
        min_mode: job.min_mode,
        ..settings.clone()
    };
    let start = Instant::now();
    let out = parse_spec(&inst.formula, &inst.partition.to_text())
        .map_err(Error::from)
        .and_then(|(psi, part)| synthesize(&psi, &part, &cfg, cfg.verify));
    let wall_ms = (start.elapsed().as_secs_f64() * 1000.0 * 1000.0).round() / 1000.0;
    if wall_ms > cfg.time_limit * 1000.0 {
        return Row::empty(job, Status::Timeout, wall_ms);
    }
    match out {
        Ok(s) => {
            let failed = s.verification.as_ref().is_some_and(|v| !v.verdict.passed());
            Row {
                status: if failed { Status::Error } else { Status::Ok },
                realizable: Some(s.result.realizable),
                arena_bits: Some(s.arena.num_state_bits()),
                outer_iters: Some(s.result.stats.outer_iters),
                inner_iters: Some(s.result.stats.inner_iters),
                bdd_ops: Some(s.result.stats.bdd_ops),
                ..Row::empty(job, Status::Ok, wall_ms)
            }
        }
        Err(e) if e.is_budget() => Row::empty(job, Status::Memout, wall_ms),
        Err(_) => Row::empty(job, Status::Error, wall_ms),
    }
}

/// Runs every job through `runner`, which never aborts the matrix.
pub fn run_matrix(jobs: &[Job], mut runner: impl FnMut(&Job) -> Row) -> Vec<Row> {
    jobs.iter().map(|j| runner(j)).collect()
}

/// Rows that disagree with the expected verdict of their instance, or with
/// another solver on the same instance and mode.
pub fn cross_check(rows: &[Row]) -> Vec<String> {
    let mut issues = Vec::new();
    for r in rows.iter().filter(|r| r.status == Status::Ok) {
        let expected = r.family.generate(r.size).expected;
        if r.realizable != Some(expected) {
            issues.push(format!(
                "{} n={} {} {}: realizable={:?}, expected {expected}",
                r.family, r.size, r.solver, r.min_mode.name(), r.realizable
            ));
        }
        if let Some(o) = rows.iter().find(|o| {
            o.status == Status::Ok
                && o.family == r.family
                && o.size == r.size
                && o.min_mode == r.min_mode
                && o.realizable != r.realizable
        }) {
            issues.push(format!("{} n={}: {} and {} disagree", r.family, r.size, r.solver, o.solver));
        }
    }
    issues
}

pub fn write_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(format!("{CSV_HEADER}\n{body}"))
}

/// Parses a results file. Lines starting with `#` are skipped; errors name
/// the 1-based record.
pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Format(format!("line 1: {e}")))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Format("line 1: unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<Row>().enumerate() {
        rows.push(rec.map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?);
    }
    Ok(rows)
}
