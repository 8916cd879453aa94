//! Scenario runner: evaluates checks over (alpha, symbol) grids and collects
//! the results into a [`RunReport`].

pub mod checks;
pub mod config;
pub mod report;
pub mod scenario;

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use checks::{lemma11_ratio_check, run_cell};
pub use config::Config;
pub use report::{emit_report, load_report, CheckRecord, ReportFormat, RunReport, Status};
pub use scenario::{load_scenarios, parse_scenarios, verify_all, CheckId, Scenario};

use crate::scalars::WeightParameter;
use crate::symbols::SymbolSpec;
use crate::Result;

struct Cell<'a> {
    order: usize,
    scenario: &'a str,
    check: CheckId,
    alpha: Option<WeightParameter>,
    symbol: Option<&'a SymbolSpec>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs one scenario.
pub fn run_scenario(scenario: &Scenario, config: &Config) -> Result<RunReport> {
    run_scenarios(std::slice::from_ref(scenario), config)
}

/// Runs several scenarios into one report. Configuration and scenario
/// errors are returned before any computation; numerical problems inside a
/// check are recorded as failures.
pub fn run_scenarios(scenarios: &[Scenario], config: &Config) -> Result<RunReport> {
    config.validate()?;
    for s in scenarios {
        s.validate()?;
    }
    let started = Instant::now();
    let started_unix = unix_now();

    let mut cells = Vec::new();
    for (order, s) in scenarios.iter().enumerate() {
        for &check in &s.checks {
            let alphas: Vec<Option<WeightParameter>> = if check.uses_alpha() {
                s.alpha_list.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            let symbols: Vec<Option<&SymbolSpec>> = if check.uses_symbol() {
                s.symbols.iter().map(Some).collect()
            } else {
                vec![None]
            };
            for &alpha in &alphas {
                for &symbol in &symbols {
                    cells.push(Cell {
                        order,
                        scenario: &s.name,
                        check,
                        alpha,
                        symbol,
                    });
                }
            }
        }
    }

    let mut records: Vec<(usize, CheckRecord)> = cells
        .par_iter()
        .map(|c| {
            let out = run_cell(c.check, c.alpha, c.symbol, config);
            let record = CheckRecord {
                scenario: c.scenario.to_string(),
                check: c.check,
                alpha: c.alpha.map(|a| a.value()),
                symbol: c.symbol.map(|s| s.to_string()),
                status: out.status,
                metrics: out.metrics,
                notes: out.notes,
            };
            (c.order, record)
        })
        .collect();
    records.sort_by(|(oa, a), (ob, b)| {
        oa.cmp(ob)
            .then(a.check.cmp(&b.check))
            .then(a.alpha.unwrap_or(f64::NAN).total_cmp(&b.alpha.unwrap_or(f64::NAN)))
            .then(a.symbol.cmp(&b.symbol))
    });

    let mut report = RunReport::empty();
    report.scenarios = scenarios.iter().map(|s| s.name.clone()).collect();
    report.config = config.to_map();
    report.started_unix = started_unix;
    report.finished_unix = unix_now();
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    report.checks = records.into_iter().map(|(_, r)| r).collect();
    report.recount();
    Ok(report)
}
