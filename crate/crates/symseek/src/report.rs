//! Per-entry corpus runs and the aggregated report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use symseek_core::algsolve::{Clock, SolveBudget, SolveMode};
use symseek_core::strategies::{branch_contains, run_plan, SearchConfig, SearchError, StrategyPlan};
use symseek_core::verify::verify_sigma;

use crate::clock::{WallClock, SEARCH_STACK};
use crate::corpus::CorpusEntry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Match,
    VerifiedDifferent,
    NotFound,
    Error,
    /// A parametric entry produced verified parameter branches.
    Branches,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryReport {
    pub id: String,
    pub status: Status,
    pub strategy: Option<String>,
    pub elapsed_ms: u64,
    pub sigma: Option<String>,
    /// Exact residual check of the found sigma.
    pub residual_zero: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub entries: Vec<EntryReport>,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub n_max: u32,
    pub timeout_ms: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            n_max: 7,
            timeout_ms: 60_000,
        }
    }
}

impl RunReport {
    pub fn count(&self, s: Status) -> usize {
        self.entries.iter().filter(|e| e.status == s).count()
    }

    /// 0 when no entry is NotFound or Error, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.count(Status::NotFound) + self.count(Status::Error) == 0 {
            0
        } else {
            3
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{:<20} {:<18} {:<15} {:>8} ms  {}",
                e.id,
                format!("{:?}", e.status),
                e.strategy.as_deref().unwrap_or("-"),
                e.elapsed_ms,
                e.sigma
                    .as_deref()
                    .or(e.message.as_deref())
                    .unwrap_or("")
            );
        }
        let _ = writeln!(
            s,
            "{} entries: {} match, {} verified-different, {} parametric, {} not found, {} errors",
            self.entries.len(),
            self.count(Status::Match),
            self.count(Status::VerifiedDifferent),
            self.count(Status::Branches),
            self.count(Status::NotFound),
            self.count(Status::Error)
        );
        s
    }
}

fn error(id: &str, msg: String, elapsed_ms: u64) -> EntryReport {
    EntryReport {
        id: id.into(),
        status: Status::Error,
        strategy: None,
        elapsed_ms,
        sigma: None,
        residual_zero: false,
        message: Some(msg),
    }
}

/// Runs the automatic plan on one entry and classifies the outcome.
pub fn run_entry(entry: &CorpusEntry, opts: &RunOptions) -> EntryReport {
    let clock = WallClock::new();
    let ode = match entry.ode() {
        Ok(o) => o,
        Err(e) => return error(&entry.id, e.to_string(), 0),
    };
    let nonzero = match entry.nonzero(&ode) {
        Ok(n) => n,
        Err(e) => return error(&entry.id, e, 0),
    };
    let expected = match entry.sigma(&ode).transpose() {
        Ok(s) => s,
        Err(e) => return error(&entry.id, format!("expected sigma: {}", e), 0),
    };
    let mut cfg = SearchConfig::new(&clock);
    cfg.n_max = opts.n_max;
    cfg.budget = SolveBudget {
        timeout_ms: opts.timeout_ms,
        ..SolveBudget::default()
    };
    cfg.nonzero = nonzero;
    let parametric = entry.parametric && !ode.params().is_empty();
    let plan = if parametric {
        cfg.mode = SolveMode::Parametric;
        cfg.all_branches = true;
        StrategyPlan::parametric(&ode, opts.n_max)
    } else {
        cfg.mode = SolveMode::Generic;
        StrategyPlan::auto(&ode, opts.n_max)
    };
    let res = run_plan(&ode, &plan, &cfg);
    let elapsed_ms = clock.now_ms();
    match res {
        Ok(r) => {
            if parametric {
                return EntryReport {
                    id: entry.id.clone(),
                    status: Status::Branches,
                    strategy: Some(r.strategy.kind.name()),
                    elapsed_ms,
                    sigma: Some(ode.render_expr(&r.sigma)),
                    // each branch was verified on its specialized equation
                    residual_zero: r.verified,
                    message: Some(format!(
                        "{} branches, {} unresolved",
                        r.branches.len(),
                        r.unresolved.len()
                    )),
                };
            }
            let residual_zero = verify_sigma(&r.sigma, &ode).0;
            let status = match &expected {
                Some(t) if r.branches.iter().any(|b| branch_contains(b, t, &clock)) => Status::Match,
                Some(t) if residual_zero && verify_sigma(t, &ode).0 => Status::VerifiedDifferent,
                Some(_) => Status::Error,
                None if residual_zero => Status::VerifiedDifferent,
                None => Status::Error,
            };
            EntryReport {
                id: entry.id.clone(),
                status,
                strategy: Some(r.strategy.kind.name()),
                elapsed_ms,
                sigma: Some(ode.render_expr(&r.sigma)),
                residual_zero,
                message: None,
            }
        }
        Err(e @ SearchError::NotFound { .. }) | Err(e @ SearchError::BudgetExhausted { .. }) => {
            EntryReport {
                id: entry.id.clone(),
                status: Status::NotFound,
                strategy: None,
                elapsed_ms,
                sigma: None,
                residual_zero: false,
                message: Some(e.to_string()),
            }
        }
        Err(e) => error(&entry.id, e.to_string(), elapsed_ms),
    }
}

/// Runs every entry on a pool of `jobs` workers; the report is ordered as
/// the input.
pub fn run_corpus(entries: &[CorpusEntry], jobs: usize, opts: &RunOptions) -> RunReport {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .stack_size(SEARCH_STACK)
        .build()
        .expect("worker pool");
    let entries = pool.install(|| {
        entries
            .par_iter()
            .map(|e| run_entry(e, opts))
            .collect::<Vec<_>>()
    });
    RunReport { entries }
}
